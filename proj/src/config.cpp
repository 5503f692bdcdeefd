#include "klsens/config.hpp"

#include <algorithm>
#include <cmath>

#include "klsens/errors.hpp"

namespace klsens {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& context, const std::string& what) {
  fail(ErrorKind::validation, context + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) bad(context, std::string("missing required field '") + key + "'");
  return *it;
}

double number_at(const json& j, const char* key, const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_number()) bad(context + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback,
                 const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) bad(context + "." + key, "expected a number");
  return it->get<double>();
}

std::int64_t integer_at(const json& j, const char* key, const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_number_integer()) bad(context + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t integer_or(const json& j, const char* key, std::int64_t fallback,
                        const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) bad(context + "." + key, "expected an integer");
  return it->get<std::int64_t>();
}

std::string string_at(const json& j, const char* key, const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_string()) bad(context + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list_at(const json& j, const char* key,
                                   const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_array()) bad(context + "." + key, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) bad(context + "." + key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

void check_known_fields(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const std::string& context) {
  if (!j.is_object()) bad(context, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      bad(context, "unknown field '" + key + "'");
  }
}

StochasticModel model_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_object()) bad(context, "expected a model object");
  std::string type = string_at(j, "type", context);
  if (type == "finite") {
    check_known_fields(j, {"type", "atoms", "probs"}, context);
    return StochasticModel::finite(FiniteDistribution(
        number_list_at(j, "atoms", context), number_list_at(j, "probs", context)));
  }
  if (type == "exponential") {
    check_known_fields(j, {"type", "rate"}, context);
    return StochasticModel::exponential(number_at(j, "rate", context));
  }
  if (type == "gamma") {
    check_known_fields(j, {"type", "shape", "rate"}, context);
    return StochasticModel::gamma(number_at(j, "shape", context),
                                  number_at(j, "rate", context));
  }
  if (type == "uniform") {
    check_known_fields(j, {"type", "lower", "upper"}, context);
    return StochasticModel::uniform(number_at(j, "lower", context),
                                    number_at(j, "upper", context));
  }
  if (type == "normal") {
    check_known_fields(j, {"type", "mean", "sigma", "atoms"}, context);
    double mean = number_at(j, "mean", context);
    double sigma = number_at(j, "sigma", context);
    auto it = j.find("atoms");
    if (it == j.end()) return StochasticModel::normal(mean, sigma);
    std::int64_t n = integer_at(j, "atoms", context);
    if (n < 3) bad(context + ".atoms", "discretization needs at least 3 atoms");
    return StochasticModel::finite(
        discretize_normal(mean, sigma, static_cast<std::size_t>(n)));
  }
  bad(context + ".type",
      "unknown model type '" + type +
          "' (expected finite, exponential, gamma, uniform or normal)");
}

NestedDesign design_from_json(const nlohmann::json& j, const std::string& context) {
  check_known_fields(j, {"outer", "inner", "sections", "confidence"}, context);
  NestedDesign d;
  d.outer = static_cast<std::size_t>(integer_or(j, "outer", 30, context));
  d.inner = static_cast<std::size_t>(integer_or(j, "inner", 10, context));
  d.sections = static_cast<std::size_t>(integer_or(j, "sections", 20, context));
  d.confidence = number_or(j, "confidence", 0.95, context);
  if (d.outer < 2 || d.inner < 2 || d.sections < 2)
    bad(context, "design needs outer >= 2, inner >= 2, sections >= 2");
  if (!(d.confidence > 0.0 && d.confidence < 1.0))
    bad(context + ".confidence", "must lie strictly between 0 and 1");
  return d;
}

namespace {

QueueConfig queue_from_json(const json& j, const std::string& context) {
  std::string kind = string_at(j, "kind", context);
  std::int64_t servers = integer_at(j, "servers", context);
  std::int64_t customer = integer_or(j, "customer", 100, context);
  if (servers < 1) bad(context + ".servers", "must be positive");
  if (customer < 1) bad(context + ".customer", "must be positive");
  QueueConfig qc;
  if (kind == "mms") {
    check_known_fields(j, {"type", "kind", "servers", "customer", "perturb"}, context);
    qc = QueueConfig::mms(static_cast<int>(servers), static_cast<int>(customer));
  } else if (kind == "ggs") {
    check_known_fields(j, {"type", "kind", "servers", "customer", "perturb"}, context);
    qc = QueueConfig::ggs(static_cast<int>(servers), static_cast<int>(customer));
  } else if (kind == "custom") {
    check_known_fields(j,
                       {"type", "kind", "servers", "customer", "perturb",
                        "interarrival", "service"},
                       context);
    qc.servers = static_cast<int>(servers);
    qc.customer_index = static_cast<int>(customer);
    qc.interarrival =
        model_from_json(field(j, "interarrival", context), context + ".interarrival");
    qc.service = model_from_json(field(j, "service", context), context + ".service");
  } else {
    bad(context + ".kind", "expected mms, ggs or custom");
  }
  auto it = j.find("perturb");
  if (it != j.end()) {
    if (!it->is_string()) bad(context + ".perturb", "expected a string");
    std::string p = it->get<std::string>();
    if (p == "interarrival")
      qc.perturb_interarrival = true;
    else if (p != "service")
      bad(context + ".perturb", "expected 'service' or 'interarrival'");
  }
  return qc;
}

}  // namespace

const StochasticModel& ExperimentConfig::primary_model() const {
  if (model) return *model;
  require(queue.has_value(), ErrorKind::validation, "config has no input model");
  return queue->perturb_interarrival ? queue->interarrival : queue->service;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  const std::string ctx = "config";
  check_known_fields(j,
                     {"model", "cost", "design", "eta", "sense", "seed", "alpha",
                      "order", "samples", "output"},
                     ctx);
  ExperimentConfig cfg;

  const json& cost_j = field(j, "cost", ctx);
  cfg.cost_kind = string_at(cost_j, "type", ctx + ".cost");

  if (j.contains("model"))
    cfg.model = model_from_json(j.at("model"), ctx + ".model");

  if (cfg.cost_kind == "iid-sum-tail") {
    check_known_fields(cost_j, {"type", "threshold", "length"}, ctx + ".cost");
    if (!cfg.model) bad(ctx, "cost type iid-sum-tail needs a model");
    double y = number_at(cost_j, "threshold", ctx + ".cost");
    std::int64_t T = integer_at(cost_j, "length", ctx + ".cost");
    if (T < 1) bad(ctx + ".cost.length", "must be positive");
    cfg.cost.horizon = HorizonSpec::fixed(static_cast<int>(T));
    cfg.cost.symmetric = true;
    cfg.cost.sup_abs = 1.0;
    cfg.cost.eval = [y](std::span<const double> x, std::span<const double>) {
      double s = 0.0;
      for (double v : x) s += v;
      return s > y ? 1.0 : 0.0;
    };
  } else if (cfg.cost_kind == "user-table") {
    check_known_fields(cost_j, {"type", "values"}, ctx + ".cost");
    if (!cfg.model || !cfg.model->has_exact())
      bad(ctx, "cost type user-table needs a finite model");
    std::vector<double> values = number_list_at(cost_j, "values", ctx + ".cost");
    const FiniteDistribution& d = cfg.model->exact();
    if (values.size() != d.size())
      bad(ctx + ".cost.values", "must have one value per model atom");
    // Atoms arrive sorted in the distribution; evaluate by exact lookup.
    std::vector<std::pair<double, double>> table(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) table[i] = {d.atom(i), values[i]};
    std::sort(table.begin(), table.end());
    cfg.cost.horizon = HorizonSpec::single();
    cfg.cost.eval = [table](std::span<const double> x, std::span<const double>) {
      auto it = std::lower_bound(
          table.begin(), table.end(), x[0],
          [](const std::pair<double, double>& a, double v) { return a.first < v; });
      require(it != table.end() && it->first == x[0], ErrorKind::validation,
              "cost table lookup outside the model support");
      return it->second;
    };
  } else if (cfg.cost_kind == "queue-wait") {
    if (cfg.model) bad(ctx, "queue-wait carries its own models; drop 'model'");
    cfg.queue = queue_from_json(cost_j, ctx + ".cost");
    cfg.cost = queue_cost(*cfg.queue);
  } else {
    bad(ctx + ".cost.type",
        "unknown cost type '" + cfg.cost_kind +
            "' (expected iid-sum-tail, user-table or queue-wait)");
  }

  cfg.design = j.contains("design")
                   ? design_from_json(j.at("design"), ctx + ".design")
                   : NestedDesign{};

  if (j.contains("eta")) {
    const json& e = j.at("eta");
    if (e.is_number())
      cfg.eta_grid = {e.get<double>()};
    else if (e.is_array())
      cfg.eta_grid = number_list_at(j, "eta", ctx);
    else
      bad(ctx + ".eta", "expected a number or an array of numbers");
    for (double v : cfg.eta_grid)
      if (!(v >= 0.0)) bad(ctx + ".eta", "values must be nonnegative");
  }

  if (j.contains("sense")) cfg.sense = sense_from_string(string_at(j, "sense", ctx));
  if (j.contains("seed")) {
    cfg.seed = static_cast<std::uint64_t>(integer_at(j, "seed", ctx));
    cfg.seed_given = true;
  }
  if (j.contains("alpha")) {
    cfg.alpha = number_at(j, "alpha", ctx);
    if (!(*cfg.alpha > 0.0)) bad(ctx + ".alpha", "must be positive");
  }
  cfg.order = static_cast<int>(integer_or(j, "order", 2, ctx));
  if (cfg.order != 1 && cfg.order != 2) bad(ctx + ".order", "must be 1 or 2");
  std::int64_t samples = integer_or(j, "samples", 10000, ctx);
  if (samples < 2) bad(ctx + ".samples", "need at least 2");
  cfg.samples = static_cast<std::size_t>(samples);

  if (j.contains("output")) {
    const json& out = j.at("output");
    check_known_fields(out, {"report", "sweep"}, ctx + ".output");
    if (out.contains("report"))
      cfg.report_path = string_at(out, "report", ctx + ".output");
    if (out.contains("sweep"))
      cfg.sweep_path = string_at(out, "sweep", ctx + ".output");
  }
  return cfg;
}

QueueTableConfig parse_queue_table_config(const nlohmann::json& j) {
  const std::string ctx = "config";
  check_known_fields(j, {"queue", "samples", "design", "seed"}, ctx);
  QueueTableConfig cfg;
  const json& q = field(j, "queue", ctx);
  check_known_fields(q,
                     {"kind", "servers", "customer", "perturb", "interarrival",
                      "service"},
                     ctx + ".queue");
  const json& servers = field(q, "servers", ctx + ".queue");
  std::vector<std::int64_t> server_list;
  if (servers.is_number_integer())
    server_list = {servers.get<std::int64_t>()};
  else if (servers.is_array())
    for (const auto& e : servers) {
      if (!e.is_number_integer())
        bad(ctx + ".queue.servers", "expected integers");
      server_list.push_back(e.get<std::int64_t>());
    }
  else
    bad(ctx + ".queue.servers", "expected an integer or an array of integers");
  if (server_list.empty()) bad(ctx + ".queue.servers", "must not be empty");
  for (std::int64_t s : server_list) {
    json one = q;
    one["servers"] = s;
    cfg.configs.push_back(queue_from_json(one, ctx + ".queue"));
  }
  std::int64_t samples = integer_or(j, "samples", 10000, ctx);
  if (samples < 2) bad(ctx + ".samples", "need at least 2");
  cfg.samples = static_cast<std::size_t>(samples);
  cfg.design = j.contains("design")
                   ? design_from_json(j.at("design"), ctx + ".design")
                   : NestedDesign{};
  if (j.contains("seed")) {
    cfg.seed = static_cast<std::uint64_t>(integer_at(j, "seed", ctx));
    cfg.seed_given = true;
  }
  return cfg;
}

}  // namespace klsens
