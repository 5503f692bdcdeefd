#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "klsens/config.hpp"
#include "klsens/enumeration.hpp"
#include "klsens/errors.hpp"
#include "klsens/exact1d.hpp"
#include "klsens/expansion.hpp"
#include "klsens/fixed_point.hpp"
#include "klsens/influence.hpp"
#include "klsens/nested_mc.hpp"
#include "klsens/oracle.hpp"
#include "klsens/parallel.hpp"
#include "klsens/queue.hpp"
#include "klsens/stats.hpp"

namespace {

using klsens::ErrorKind;
using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 8811;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<std::uint64_t> outer, inner, sections;
  std::optional<double> confidence;
  std::optional<double> eta;
  std::optional<int> order;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_inner = true) {
  cmd->add_option("--config", a.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", a.seed, "override the config seed");
  cmd->add_option("--threads", a.threads,
                  "worker thread cap (0 = available parallelism)");
  cmd->add_option("--outer", a.outer, "override design outer sample count");
  if (with_inner)
    cmd->add_option("--inner", a.inner, "override design inner sample count");
  cmd->add_option("--sections", a.sections, "override design section count");
  cmd->add_option("--confidence", a.confidence, "override design confidence level");
  cmd->add_option("--eta", a.eta, "override the eta grid with a single value");
  cmd->add_option("--order", a.order, "sweep order (1 or 2)");
  cmd->add_option("--out", a.out_path, "output path for CSV/JSON artifacts");
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  klsens::require(static_cast<bool>(in), ErrorKind::validation,
                  "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    klsens::fail(ErrorKind::validation,
                 std::string("config is not valid JSON: ") + e.what());
  }
}

klsens::ExperimentConfig load_experiment(const CommonArgs& a) {
  klsens::ExperimentConfig cfg = klsens::parse_experiment_config(load_json(a.config_path));
  if (a.outer) cfg.design.outer = *a.outer;
  if (a.inner) cfg.design.inner = *a.inner;
  if (a.sections) cfg.design.sections = *a.sections;
  if (a.confidence) cfg.design.confidence = *a.confidence;
  if (a.eta) cfg.eta_grid = {*a.eta};
  if (a.order) cfg.order = *a.order;
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.seed_given = true;
  }
  if (!cfg.seed_given) {
    if (const char* env = std::getenv("KLSENS_SEED")) {
      cfg.seed = std::stoull(env);
      cfg.seed_given = true;
    } else {
      cfg.seed = kDefaultSeed;
    }
  }
  return cfg;
}

void apply_threads(int threads) {
  klsens::require(threads >= 0, ErrorKind::validation,
                  "--threads must be nonnegative");
  klsens::par::set_policy(klsens::par::Policy::omp(threads));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  klsens::require(static_cast<bool>(out), ErrorKind::validation,
                  "cannot write output file '" + path + "'");
  out << text;
}

bool can_enumerate(const klsens::ExperimentConfig& cfg) {
  if (cfg.queue) return false;
  if (!cfg.model || !cfg.model->has_exact()) return false;
  if (cfg.cost.horizon.kind != klsens::HorizonSpec::Kind::fixed) return false;
  try {
    klsens::path_count_checked(cfg.model->exact().size(), cfg.cost.horizon.length);
    if (cfg.cost.auxiliary) {
      if (!cfg.cost.auxiliary->has_exact()) return false;
      klsens::path_count_checked(cfg.cost.auxiliary->exact().size(),
                                 static_cast<int>(cfg.cost.aux_count));
    }
  } catch (const klsens::Error&) {
    return false;
  }
  return true;
}

double eta_single(const klsens::ExperimentConfig& cfg) {
  klsens::require(cfg.eta_grid.size() == 1, ErrorKind::validation,
                  "this command needs exactly one eta (config eta or --eta)");
  return cfg.eta_grid.front();
}

void emit(const CommonArgs& a, const json& j) {
  std::string text = j.dump(2);
  text.push_back('\n');
  std::cout << text;
  if (!a.out_path.empty()) write_text(a.out_path, text);
}

// Benchmark mean of the cost under the unperturbed model by plain Monte
// Carlo, one child stream per replication.
klsens::McEstimate mc_benchmark(const klsens::ExperimentConfig& cfg) {
  const std::size_t R = cfg.samples;
  std::vector<double> draws(R);
  if (cfg.queue) {
    const klsens::QueueConfig& qc = *cfg.queue;
    klsens::par::for_indexed(R, [&](std::size_t r) {
      draws[r] = klsens::simulate_wait(qc, cfg.seed, 2 * r + 1);
    });
  } else {
    const klsens::StochasticModel& model = cfg.primary_model();
    const int T = cfg.cost.horizon.length;
    klsens::StreamRng base(cfg.seed, 1);
    klsens::par::for_indexed(R, [&](std::size_t r) {
      klsens::StreamRng rng = base.child(r);
      std::vector<double> path(T);
      for (double& v : path) v = model.draw(rng);
      std::vector<double> aux = klsens::draw_auxiliary(cfg.cost, rng);
      draws[r] = cfg.cost.eval(path, aux);
    });
  }
  klsens::McEstimate est;
  est.replications = R;
  est.value = klsens::stats::mean(draws);
  est.std_error = std::sqrt(klsens::stats::sample_variance(draws) /
                            static_cast<double>(R));
  return est;
}

int cmd_analyze(const CommonArgs& a) {
  klsens::ExperimentConfig cfg = load_experiment(a);
  klsens::DerivativeReport report;
  std::string mode;
  if (can_enumerate(cfg)) {
    mode = "exact";
    const klsens::StochasticModel& model = *cfg.model;
    klsens::InfluenceExact inf = klsens::influence_exact(model, cfg.cost);
    klsens::InteractionExact inter = klsens::interaction_exact(model, cfg.cost);
    auto cg = klsens::cumulants(model.exact(), inf.values);
    report = klsens::derive(cg.variance, cg.kappa3, inter.nu, inf.mean_h, cfg.sense);
  } else {
    mode = "nested-mc";
    klsens::McEstimate bench = mc_benchmark(cfg);
    klsens::SectionedEstimate z =
        cfg.queue ? klsens::sectioned_zeta1(cfg.primary_model(),
                                            klsens::queue_sampler(*cfg.queue),
                                            cfg.design, cfg.seed, 2)
                  : klsens::sectioned_zeta1(cfg.primary_model(), cfg.cost,
                                            cfg.design, cfg.seed, 2);
    report.benchmark_mean = bench.value;
    report.sense = cfg.sense;
    report.zeta1 = z.point;
    report.var_g = 0.5 * z.point * z.point;
    if (bench.value != 0.0) {
      report.relative_impact = report.zeta1 / std::fabs(bench.value);
    } else {
      report.relative_impact_defined = false;
    }
    double tq = klsens::stats::student_t_quantile(
        0.5 * (1.0 + cfg.design.confidence),
        static_cast<double>(cfg.samples - 1));
    report.benchmark_ci = klsens::ConfidenceInterval{
        bench.value - tq * bench.std_error, bench.value + tq * bench.std_error,
        cfg.design.confidence};
    if (!z.clamped)
      report.zeta1_ci =
          klsens::ConfidenceInterval{z.ci_low, z.ci_high, z.confidence};
  }

  json out = report.to_json();
  out["mode"] = mode;
  out["seed"] = cfg.seed;
  if (mode == "nested-mc") out["second_order_estimated"] = false;

  std::string report_text = out.dump(2);
  report_text.push_back('\n');
  std::cout << report_text;
  if (cfg.report_path) write_text(*cfg.report_path, report_text);

  if (!cfg.eta_grid.empty()) {
    klsens::SweepLine line = klsens::sweep(report, cfg.eta_grid, cfg.order);
    std::string csv = line.to_csv();
    if (!a.out_path.empty()) write_text(a.out_path, csv);
    if (cfg.sweep_path) write_text(*cfg.sweep_path, csv);
  }
  return 0;
}

int cmd_exact1d(const CommonArgs& a) {
  klsens::ExperimentConfig cfg = load_experiment(a);
  klsens::require(cfg.model && cfg.model->has_exact(), ErrorKind::validation,
                  "exact1d needs a finite-support model");
  klsens::require(cfg.cost.horizon.kind == klsens::HorizonSpec::Kind::fixed &&
                      cfg.cost.horizon.length == 1,
                  ErrorKind::validation, "exact1d handles horizon length 1 only");
  const klsens::FiniteDistribution& d = cfg.model->exact();
  std::vector<double> h = klsens::cost_table(d, cfg.cost);
  klsens::require(!cfg.eta_grid.empty(), ErrorKind::validation,
                  "exact1d needs at least one eta (config eta or --eta)");
  klsens::Sense sense = cfg.sense == klsens::Sense::both ? klsens::Sense::max : cfg.sense;

  json solutions = json::array();
  for (double eta : cfg.eta_grid) {
    klsens::TiltSolution s = klsens::solve_tilt(d, h, eta, sense);
    solutions.push_back(s.to_json());
  }
  klsens::Expansion1d e = klsens::expansion1d(d, h);
  json out{{"schema", "klsens-exact1d/1"},
           {"sense", klsens::to_string(sense)},
           {"benchmark", e.benchmark},
           {"zeta1", e.zeta1},
           {"zeta2", e.zeta2},
           {"solutions", solutions}};
  emit(a, out);
  return 0;
}

int cmd_fixedpoint(const CommonArgs& a) {
  klsens::ExperimentConfig cfg = load_experiment(a);
  klsens::require(cfg.model && cfg.model->has_exact(), ErrorKind::validation,
                  "fixedpoint needs a finite-support model");
  klsens::FixedPointSolution sol =
      cfg.alpha ? klsens::solve_fixed_point(*cfg.model, cfg.cost, *cfg.alpha)
                : klsens::calibrate_alpha(*cfg.model, cfg.cost, eta_single(cfg));
  json out = sol.to_json();
  out["schema"] = "klsens-fixedpoint/1";
  emit(a, out);
  return 0;
}

int cmd_oracle_compare(const CommonArgs& a) {
  klsens::ExperimentConfig cfg = load_experiment(a);
  klsens::require(cfg.model && cfg.model->has_exact(), ErrorKind::validation,
                  "oracle-compare needs a finite-support model");
  klsens::require(!cfg.eta_grid.empty(), ErrorKind::validation,
                  "oracle-compare needs at least one eta");
  klsens::Sense sense = cfg.sense == klsens::Sense::both ? klsens::Sense::max : cfg.sense;
  const klsens::StochasticModel& model = *cfg.model;

  klsens::InfluenceExact inf = klsens::influence_exact(model, cfg.cost);
  klsens::InteractionExact inter = klsens::interaction_exact(model, cfg.cost);
  auto cg = klsens::cumulants(model.exact(), inf.values);
  klsens::DerivativeReport rep =
      klsens::derive(cg.variance, cg.kappa3, inter.nu, inf.mean_h, sense);

  klsens::CostSpec signed_cost = cfg.cost;
  if (sense == klsens::Sense::min) {
    auto inner = cfg.cost.eval;
    signed_cost.eval = [inner](std::span<const double> x, std::span<const double> y) {
      return -inner(x, y);
    };
  }

  json etas = json::array(), oracle_v = json::array(), fp_v = json::array(),
       exp_v = json::array(), gaps = json::array();
  std::vector<double> gap_abs, eta_pos;
  for (double eta : cfg.eta_grid) {
    klsens::OracleResult orc = klsens::brute_force(model, cfg.cost, eta, sense, cfg.seed);
    double expansion_value = rep.benchmark_mean + rep.signed_zeta1() * std::sqrt(eta) +
                             rep.zeta2 * eta;
    double fp_obj;
    if (eta == 0.0) {
      fp_obj = rep.benchmark_mean;
    } else {
      klsens::FixedPointSolution fp =
          klsens::calibrate_alpha(model, signed_cost, eta, 1e-10);
      fp_obj = sense == klsens::Sense::min ? -fp.objective : fp.objective;
    }
    etas.push_back(eta);
    oracle_v.push_back(orc.optimum);
    fp_v.push_back(fp_obj);
    exp_v.push_back(expansion_value);
    double gap = orc.optimum - expansion_value;
    gaps.push_back(gap);
    if (eta > 0.0 && std::fabs(gap) > 0.0) {
      eta_pos.push_back(eta);
      gap_abs.push_back(std::fabs(gap));
    }
  }
  json out{{"schema", "klsens-oracle-compare/1"},
           {"sense", klsens::to_string(sense)},
           {"benchmark", rep.benchmark_mean},
           {"zeta1", rep.signed_zeta1()},
           {"zeta2", rep.zeta2},
           {"eta", etas},
           {"oracle", oracle_v},
           {"fixed_point", fp_v},
           {"expansion", exp_v},
           {"gap_oracle_expansion", gaps}};
  if (gap_abs.size() >= 3)
    out["gap_loglog_slope"] = klsens::stats::loglog_slope(eta_pos, gap_abs);
  emit(a, out);
  return 0;
}

int cmd_queue_table(const CommonArgs& a) {
  klsens::QueueTableConfig cfg = klsens::parse_queue_table_config(load_json(a.config_path));
  if (a.outer) cfg.design.outer = *a.outer;
  if (a.inner) cfg.design.inner = *a.inner;
  if (a.sections) cfg.design.sections = *a.sections;
  if (a.confidence) cfg.design.confidence = *a.confidence;
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.seed_given = true;
  }
  if (!cfg.seed_given) {
    if (const char* env = std::getenv("KLSENS_SEED"))
      cfg.seed = std::stoull(env);
    else
      cfg.seed = kDefaultSeed;
  }
  auto rows = klsens::benchmark_table(cfg.configs, cfg.samples, cfg.design, cfg.seed);
  std::string csv = klsens::table_to_csv(rows);
  std::cout << csv;
  if (!a.out_path.empty()) write_text(a.out_path, csv);
  return 0;
}

int cmd_pilot(const CommonArgs& a, const std::vector<std::uint64_t>& inner_grid) {
  klsens::ExperimentConfig cfg = load_experiment(a);
  std::vector<std::size_t> grid(inner_grid.begin(), inner_grid.end());
  if (grid.empty()) grid = {2, 5, 10, 20, 50};
  klsens::ConditionalSampler sampler =
      cfg.queue ? klsens::queue_sampler(*cfg.queue)
                : klsens::swap_sum_sampler(cfg.primary_model(), cfg.cost);
  auto rows = klsens::pilot_inner_sweep(cfg.primary_model(), sampler, cfg.design,
                                        grid, cfg.seed, 2);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "inner,sigma_m2,std_error,zeta1_point\n";
  for (const auto& r : rows)
    os << r.inner << ',' << r.sigma_m2 << ',' << r.std_error << ','
       << r.zeta1_point << '\n';
  std::cout << os.str();
  if (!a.out_path.empty()) write_text(a.out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KL-robust sensitivity derivatives of stochastic performance measures"};
  app.require_subcommand(1);

  CommonArgs a_analyze, a_exact, a_fixed, a_oracle, a_queue, a_pilot;
  std::vector<std::uint64_t> pilot_inner;

  auto* c_analyze = app.add_subcommand(
      "analyze", "derivative report + sweep bands for an experiment config");
  add_common(c_analyze, a_analyze);
  auto* c_exact = app.add_subcommand(
      "exact1d", "single-variable exact solver and coefficients");
  add_common(c_exact, a_exact);
  auto* c_fixed = app.add_subcommand(
      "fixedpoint", "optimal change of measure via fixed-point iteration");
  add_common(c_fixed, a_fixed);
  auto* c_oracle = app.add_subcommand(
      "oracle-compare", "three-way diff: oracle vs fixed point vs expansion");
  add_common(c_oracle, a_oracle);
  auto* c_queue = app.add_subcommand(
      "queue-table", "waiting-time benchmark table with derivative columns");
  add_common(c_queue, a_queue);
  auto* c_pilot = app.add_subcommand(
      "pilot", "inner-sample-count sweep reporting estimator noise");
  add_common(c_pilot, a_pilot, /*with_inner=*/false);
  c_pilot->add_option("--inner", pilot_inner,
                      "inner sample counts to sweep (repeatable)");

  try {
    app.parse(argc, argv);
    if (c_analyze->parsed()) {
      apply_threads(a_analyze.threads);
      return cmd_analyze(a_analyze);
    }
    if (c_exact->parsed()) {
      apply_threads(a_exact.threads);
      return cmd_exact1d(a_exact);
    }
    if (c_fixed->parsed()) {
      apply_threads(a_fixed.threads);
      return cmd_fixedpoint(a_fixed);
    }
    if (c_oracle->parsed()) {
      apply_threads(a_oracle.threads);
      return cmd_oracle_compare(a_oracle);
    }
    if (c_queue->parsed()) {
      apply_threads(a_queue.threads);
      return cmd_queue_table(a_queue);
    }
    if (c_pilot->parsed()) {
      apply_threads(a_pilot.threads);
      return cmd_pilot(a_pilot, pilot_inner);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    nlohmann::json err{{"error", {{"kind", "validation"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 2;
  } catch (const klsens::Error& e) {
    nlohmann::json err{
        {"error", {{"kind", klsens::to_string(e.kind())}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
}
