// poisson_ht: command-line front end for the higher-order Poisson testing
// library.  Subcommands map one-to-one onto library operations; every run
// reads a JSON config (flags override individual fields), computes all
// results in memory, and only then writes CSV/JSON outputs plus a
// reproducibility manifest, so a failed run never leaves partial files.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 invariant
// violation.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poissonht/edgeworth.hpp"
#include "poissonht/errors.hpp"
#include "poissonht/experiments.hpp"
#include "poissonht/gauss.hpp"
#include "poissonht/inference.hpp"
#include "poissonht/intensity.hpp"
#include "poissonht/model_spec.hpp"
#include "poissonht/moments.hpp"
#include "poissonht/report.hpp"
#include "poissonht/sampler.hpp"

namespace {

using nlohmann::json;
using namespace poissonht;

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

// In-memory output set: file name -> bytes.  Written only after the whole
// command has succeeded.
using Outputs = std::map<std::string, std::string>;

void emit(const RunConfig& cfg, const Outputs& outputs, double elapsed) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::map<std::string, std::uint64_t> sums;
  for (const auto& [name, bytes] : outputs) {
    write_file((fs::path(cfg.out_dir) / name).string(), bytes);
    sums[name] = fnv1a_64(bytes);
  }
  write_manifest(cfg.out_dir, cfg.resolved_json(),
                 cfg.master_seed.value_or(0), sums, elapsed);
}

SeedSpec require_seed(const RunConfig& cfg, const char* command) {
  require(cfg.master_seed.has_value(),
          std::string(command) +
              ": master_seed is required (set \"master_seed\" in the config "
              "or pass --seed)");
  return SeedSpec{*cfg.master_seed, 0};
}

const IntensityModel& model_of(const RunConfig& cfg) {
  // parse_run_config always populates the model; guard for safety.
  require(cfg.model.has_value(), "config: model is required");
  return *cfg.model;
}

// Window sweep for the B1/D3 growth diagnostics: the configured n list when
// it already is a sweep, otherwise octave doublings of the base window.
std::vector<double> diagnostic_sweep(const RunConfig& cfg) {
  if (cfg.n_list.size() >= 2) return cfg.n_list;
  const double n0 = cfg.n_list.front();
  return {n0, 2.0 * n0, 4.0 * n0};
}

json b1_json(const B1Report& rep) {
  json j;
  j["n"] = rep.n_values;
  j["eps_n"] = rep.eps_values;
  j["T3"] = rep.integrals[0];
  j["T4"] = rep.integrals[1];
  j["T5"] = rep.integrals[2];
  j["C3"] = rep.C[0];
  j["C4"] = rep.C[1];
  j["C5"] = rep.C[2];
  j["slope3"] = rep.slope[0];
  j["slope4"] = rep.slope[1];
  j["slope5"] = rep.slope[2];
  return j;
}

json d3_json(const D3Report& rep) {
  json j;
  j["n"] = rep.n_values;
  j["max_ratio"] = rep.max_ratio;
  return j;
}

// The cubic-growth condition can legitimately fail (a homogeneous kernel has
// a lattice score), which check_B2 reports by throwing; diagnostics record
// the outcome instead of aborting the run.
json b2_json(const RunConfig& cfg) {
  const IntensityModel& model = model_of(cfg);
  const CoreQuantities core = core_quantities(model, cfg.moment_options());
  json j;
  try {
    auto kernel = [&model, &core](double x) {
      return core.phi_n * model.eval(1, model.theta0(), x) /
             model.eval(0, model.theta0(), x);
    };
    const B2Report rep =
        check_B2(model, kernel, core.eps_n, cfg.b2_c0, cfg.b2_gamma);
    j["ok"] = rep.ok;
    j["inf_value"] = rep.inf_value;
    j["bound"] = rep.bound;
    j["t_at_inf"] = rep.t_at_inf;
    j["c3"] = rep.c3;
    j["c4"] = rep.c4;
    j["c5"] = rep.c5;
  } catch (const config_error& e) {
    j["ok"] = false;
    j["error"] = e.what();
  }
  return j;
}

int cmd_quantities(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const MomentOptions mopts = cfg.moment_options();

  json doc;
  doc["alpha"] = cfg.alpha;
  doc["u"] = cfg.u_list;
  json per_n = json::array();
  for (double n : cfg.n_list) {
    const IntensityModel m = model.with_domain_length(n);
    const CoreQuantities core = core_quantities(m, mopts);
    json row;
    row["n"] = n;
    row["fisher"] = core.fisher;
    row["phi_n"] = core.phi_n;
    row["eps_n"] = core.eps_n;
    row["gamma3"] = core.gamma3;
    row["gamma4"] = core.gamma4;
    row["j_n"] = core.j_n;
    row["eps2_j_n"] = core.loss_limit_scale;
    row["threshold_second"] = score_threshold_second(cfg.alpha, core);
    row["threshold_third"] = score_threshold_third(cfg.alpha, core);
    json rgrid = json::array();
    json bgrid = json::array();
    for (double u : cfg.u_list) {
      rgrid.push_back({{"u", u}, {"value", power_loss_limit(m, u, cfg.alpha, mopts)}});
      json b{{"u", u}};
      if (u > 0.0) {
        b["value"] = alternative_quantities(m, u, cfg.alpha, mopts).b_n;
      } else {
        b["value"] = nullptr;  // the log likelihood ratio degenerates at u = 0
      }
      bgrid.push_back(b);
    }
    row["power_loss_limit"] = rgrid;
    row["np_threshold_b_n"] = bgrid;
    per_n.push_back(row);
  }
  doc["per_n"] = per_n;

  const std::vector<double> sweep = diagnostic_sweep(cfg);
  json conditions;
  conditions["b1"] = b1_json(check_B1(model, sweep, mopts));
  conditions["b2"] = b2_json(cfg);
  conditions["d3"] = d3_json(check_D3(model, sweep, mopts));
  doc["conditions"] = conditions;

  Outputs out;
  out["quantities.json"] = doc.dump(2) + "\n";
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

int cmd_sample(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const SeedSpec seed = require_seed(cfg, "sample");
  require(cfg.reps >= 1, "sample: reps must be at least 1");

  Outputs out;
  for (long long i = 0; i < cfg.reps; ++i) {
    SeedSpec rep_seed{seed.master_seed, static_cast<std::uint64_t>(i)};
    const Realization r = sample(model, model.theta0(), rep_seed);
    CsvTable table;
    table.columns = {"x"};
    table.rows.reserve(r.points.size());
    for (double x : r.points) table.rows.push_back({format_float(x)});
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06lld.csv", i);
    out[name] = csv_bytes(table);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

int cmd_size(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const SeedSpec seed = require_seed(cfg, "size");
  const ExperimentOptions eopts = cfg.experiment_options();

  CsvTable table;
  table.columns = {"test",      "n",        "alpha",     "reps",
                   "rejections", "size_hat", "std_error", "master_seed"};
  for (double n : cfg.n_list) {
    const IntensityModel m = model.with_domain_length(n);
    const PowerEstimate est =
        estimate_size(m, cfg.alpha, cfg.threshold_kind, cfg.reps, seed, eopts);
    table.rows.push_back({est.test_name, format_float(est.n),
                          format_float(cfg.alpha), std::to_string(est.reps),
                          std::to_string(est.rejections),
                          format_float(est.beta_hat),
                          format_float(est.std_error),
                          std::to_string(est.master_seed)});
  }

  Outputs out;
  out["size.csv"] = csv_bytes(table);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

// Analytic companion for a power estimate: the second/third-order score
// representations for the score tests, the Edgeworth tail of the log
// likelihood ratio at b_n for the Neyman-Pearson benchmarks.
double power_prediction(const IntensityModel& m, double u, double alpha,
                        TestKind kind, const MomentOptions& mopts) {
  switch (kind) {
    case TestKind::score2:
      return power_representation_second(m, u, alpha, mopts);
    case TestKind::score3:
      return power_representation_third(m, u, alpha, mopts);
    case TestKind::np_analytic:
    case TestKind::np_mc: {
      if (u <= 0.0) return alpha;
      const AlternativeQuantities alt = alternative_quantities(m, u, alpha, mopts);
      const ExpansionInput cum{alt.gamma3p_u, alt.gamma4p_u, 0.0};
      return 1.0 - edgeworth_cdf(-alt.A_n, cum).value;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int cmd_power(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const SeedSpec seed = require_seed(cfg, "power");
  const ExperimentOptions eopts = cfg.experiment_options();
  const MomentOptions mopts = cfg.moment_options();

  CsvTable table;
  table.columns = {"test",     "n",         "u",          "alpha",
                   "reps",     "rejections", "beta_hat",   "std_error",
                   "prediction", "master_seed"};
  for (double n : cfg.n_list) {
    const IntensityModel m = model.with_domain_length(n);
    for (double u : cfg.u_list) {
      const PowerEstimate est =
          estimate_power(m, u, cfg.alpha, cfg.test_kind, cfg.reps, seed, eopts);
      const double pred = power_prediction(m, u, cfg.alpha, cfg.test_kind, mopts);
      table.rows.push_back(
          {est.test_name, format_float(est.n), format_float(u),
           format_float(cfg.alpha), std::to_string(est.reps),
           std::to_string(est.rejections), format_float(est.beta_hat),
           format_float(est.std_error), format_float(pred),
           std::to_string(est.master_seed)});
    }
  }

  Outputs out;
  out["power.csv"] = csv_bytes(table);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

int cmd_power_loss(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const SeedSpec seed = require_seed(cfg, "power-loss");
  const ExperimentOptions eopts = cfg.experiment_options();

  CsvTable table;
  table.columns = {"u",          "n",         "alpha",        "reps",
                   "np_only",    "score_only", "cal_disagree", "loss_hat",
                   "std_error",  "r_analytic"};
  for (double u : cfg.u_list) {
    require(u > 0.0, "power-loss: u must be positive");
    const auto rows =
        paired_power_loss(model, u, cfg.alpha, cfg.n_list, cfg.reps, seed, eopts);
    for (const PairedLossEstimate& est : rows) {
      table.rows.push_back(
          {format_float(est.u), format_float(est.n), format_float(cfg.alpha),
           std::to_string(est.reps), std::to_string(est.np_only),
           std::to_string(est.score_only), std::to_string(est.cal_disagree),
           format_float(est.loss_hat), format_float(est.std_error),
           format_float(est.r_analytic)});
    }
  }

  Outputs out;
  out["power_loss.csv"] = csv_bytes(table);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

int cmd_edgeworth_check(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const SeedSpec seed = require_seed(cfg, "edgeworth-check");
  const ExperimentOptions eopts = cfg.experiment_options();
  const StatisticKind kind = cfg.statistic_kind;

  std::vector<double> u_values;
  if (kind == StatisticKind::score_null) {
    u_values.push_back(0.0);
  } else {
    for (double u : cfg.u_list)
      if (u > 0.0) u_values.push_back(u);
    require(!u_values.empty(),
            std::string("edgeworth-check: statistic '") +
                statistic_kind_name(kind) + "' needs a positive u");
  }

  CsvTable table;
  table.columns = {"statistic", "n",        "u",            "reps",
                   "sup_distance", "mc_bound", "eps3_bound", "worst_y", "ok"};
  for (double n : cfg.n_list) {
    const IntensityModel m = model.with_domain_length(n);
    for (double u : u_values) {
      std::optional<double> u_arg;
      if (kind != StatisticKind::score_null) u_arg = u;
      const EdgeworthValidation ev =
          edgeworth_validation(m, u_arg, kind, cfg.reps, seed, eopts);
      const bool ok = ev.sup_distance <= ev.mc_bound + ev.eps3_bound;
      table.rows.push_back({statistic_kind_name(kind), format_float(n),
                            format_float(u), std::to_string(cfg.reps),
                            format_float(ev.sup_distance),
                            format_float(ev.mc_bound),
                            format_float(ev.eps3_bound),
                            format_float(ev.worst_y), ok ? "1" : "0"});
    }
  }

  Outputs out;
  out["edgeworth.csv"] = csv_bytes(table);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

int cmd_validate_conditions(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const IntensityModel& model = model_of(cfg);
  const MomentOptions mopts = cfg.moment_options();
  const std::vector<double> sweep = diagnostic_sweep(cfg);

  const EnvelopeReport env = validate_envelopes(model);
  const DerivativeReport der = check_derivatives(model);
  const B1Report b1 = check_B1(model, sweep, mopts);
  const D3Report d3 = check_D3(model, sweep, mopts);

  json doc;
  doc["model"] = model.name();
  json envj;
  envj["ok"] = env.ok;
  envj["worst_margin"] = env.worst_margin;
  envj["worst_j"] = env.worst_j;
  envj["worst_theta"] = env.worst_theta;
  envj["worst_x"] = env.worst_x;
  doc["envelopes"] = envj;
  json derj;
  derj["ok"] = der.ok;
  derj["worst_rel_error"] = der.worst_rel_error;
  derj["worst_j"] = der.worst_j;
  derj["worst_x"] = der.worst_x;
  doc["derivatives"] = derj;
  doc["b1"] = b1_json(b1);
  doc["b2"] = b2_json(cfg);
  doc["d3"] = d3_json(d3);

  CsvTable b1_table;
  b1_table.columns = {"n", "eps_n", "T3", "T4", "T5"};
  for (std::size_t i = 0; i < b1.n_values.size(); ++i) {
    b1_table.rows.push_back(
        {format_float(b1.n_values[i]), format_float(b1.eps_values[i]),
         format_float(b1.integrals[0][i]), format_float(b1.integrals[1][i]),
         format_float(b1.integrals[2][i])});
  }
  CsvTable d3_table;
  d3_table.columns = {"n",        "ratio_k2", "ratio_k3", "ratio_k4",
                      "ratio_j2", "ratio_j3", "ratio_j4"};
  for (std::size_t i = 0; i < d3.n_values.size(); ++i) {
    std::vector<std::string> row{format_float(d3.n_values[i])};
    for (int k = 0; k < 6; ++k) row.push_back(format_float(d3.ratios[k][i]));
    d3_table.rows.push_back(row);
  }

  Outputs out;
  out["conditions.json"] = doc.dump(2) + "\n";
  out["b1_sweep.csv"] = csv_bytes(b1_table);
  out["d3_sweep.csv"] = csv_bytes(d3_table);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit(cfg, out, elapsed);
  return 0;
}

struct Flags {
  std::string config_path;
  std::uint64_t seed = 0;
  long long reps = 0;
  std::vector<double> n;
  std::vector<double> u;
  double alpha = 0.0;
  std::string out;
  double quad_tol = 0.0;
  int threads = 0;
};

// Flags win over config fields; overrides revalidate what they touch.
void apply_overrides(RunConfig& cfg, const Flags& f, const CLI::App& app) {
  if (app.count("--seed") > 0) cfg.master_seed = f.seed;
  if (app.count("--reps") > 0) {
    require(f.reps >= 1, "--reps must be at least 1");
    cfg.reps = f.reps;
  }
  if (app.count("--n") > 0) {
    require(!f.n.empty(), "--n needs at least one value");
    for (double n : f.n)
      require(std::isfinite(n) && n >= 1.0, "--n values must be at least 1");
    for (std::size_t i = 1; i < f.n.size(); ++i)
      require(f.n[i] > f.n[i - 1], "--n values must be strictly increasing");
    cfg.n_list = f.n;
    if (cfg.model) cfg.model = cfg.model->with_domain_length(f.n.front());
  }
  if (app.count("--u") > 0) {
    require(!f.u.empty(), "--u needs at least one value");
    for (double u : f.u)
      require(std::isfinite(u) && u >= 0.0, "--u values must be nonnegative");
    cfg.u_list = f.u;
  }
  if (app.count("--alpha") > 0) {
    require(f.alpha > 0.0 && f.alpha < 1.0, "--alpha must lie in (0, 1)");
    cfg.alpha = f.alpha;
  }
  if (app.count("--out") > 0) {
    require(!f.out.empty(), "--out must be non-empty");
    cfg.out_dir = f.out;
  }
  if (app.count("--quad-tol") > 0) {
    require(std::isfinite(f.quad_tol) && f.quad_tol > 0.0,
            "--quad-tol must be positive");
    cfg.quad_tol = f.quad_tol;
  }
  if (app.count("--threads") > 0) {
    require(f.threads >= 1, "--threads must be at least 1");
    cfg.threads = f.threads;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Higher-order hypothesis testing for one-parameter inhomogeneous "
      "Poisson processes"};
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--config", flags.config_path,
                 "JSON run configuration (required)");
  app.add_option("--seed", flags.seed, "Master RNG seed (overrides config)");
  app.add_option("--reps", flags.reps, "Replication count (overrides config)");
  app.add_option("--n", flags.n, "Window length(s), comma separated")
      ->delimiter(',');
  app.add_option("--u", flags.u, "Local alternative(s), comma separated")
      ->delimiter(',');
  app.add_option("--alpha", flags.alpha, "Test level (overrides config)");
  app.add_option("--out", flags.out, "Output directory (overrides config)");
  app.add_option("--quad-tol", flags.quad_tol,
                 "Quadrature tolerance (overrides config)");
  app.add_option("--threads", flags.threads,
                 "Worker threads (overrides config)");

  CLI::App* quantities = app.add_subcommand(
      "quantities", "Deterministic scalar quantities and diagnostics");
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "Write raw realizations as CSV");
  CLI::App* size_cmd = app.add_subcommand(
      "size", "Empirical size of the corrected score test");
  CLI::App* power_cmd =
      app.add_subcommand("power", "Empirical power of the configured test");
  CLI::App* power_loss = app.add_subcommand(
      "power-loss", "Paired score-vs-benchmark power loss");
  CLI::App* edgeworth_check = app.add_subcommand(
      "edgeworth-check", "Expansion accuracy against simulation");
  CLI::App* validate_conditions = app.add_subcommand(
      "validate-conditions", "Regularity condition diagnostics");
  for (CLI::App* sub :
       {quantities, sample_cmd, size_cmd, power_cmd, power_loss,
        edgeworth_check, validate_conditions}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    require(!flags.config_path.empty(),
            "a JSON config file is required: pass --config PATH");
    RunConfig cfg = load_run_config(flags.config_path);
    apply_overrides(cfg, flags, app);

    if (quantities->parsed()) return cmd_quantities(cfg);
    if (sample_cmd->parsed()) return cmd_sample(cfg);
    if (size_cmd->parsed()) return cmd_size(cfg);
    if (power_cmd->parsed()) return cmd_power(cfg);
    if (power_loss->parsed()) return cmd_power_loss(cfg);
    if (edgeworth_check->parsed()) return cmd_edgeworth_check(cfg);
    if (validate_conditions->parsed()) return cmd_validate_conditions(cfg);
    throw config_error("no subcommand given");
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
