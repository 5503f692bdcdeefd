#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "klsens/cost.hpp"
#include "klsens/model.hpp"
#include "klsens/nested_mc.hpp"
#include "klsens/queue.hpp"
#include "klsens/sense.hpp"

namespace klsens {

/// Validation error unless every key of j is in `allowed`.
void check_known_fields(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const std::string& context);

StochasticModel model_from_json(const nlohmann::json& j, const std::string& context);

NestedDesign design_from_json(const nlohmann::json& j, const std::string& context);

/// A full experiment: input model, cost, estimation design and sweep grid.
/// Parsed strictly against the published schema (docs/config.schema.json);
/// unknown fields are rejected with the offending path.
struct ExperimentConfig {
  std::optional<StochasticModel> model;  // absent only for queue-wait costs
  CostSpec cost;
  std::string cost_kind;                  // iid-sum-tail | user-table | queue-wait
  std::optional<QueueConfig> queue;       // set for queue-wait
  NestedDesign design;
  std::vector<double> eta_grid;
  Sense sense = Sense::max;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::optional<double> alpha;            // direct fixed-point temperature
  int order = 2;
  std::size_t samples = 10000;            // replications for sampled benchmarks
  std::optional<std::string> report_path;
  std::optional<std::string> sweep_path;

  const StochasticModel& primary_model() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);

struct QueueTableConfig {
  std::vector<QueueConfig> configs;
  std::size_t samples = 10000;
  NestedDesign design;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

QueueTableConfig parse_queue_table_config(const nlohmann::json& j);

}  // namespace klsens
