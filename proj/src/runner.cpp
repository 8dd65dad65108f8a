#include <kimura/runner.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include <kimura/catalog.hpp>
#include <kimura/diagnostics.hpp>
#include <kimura/errors.hpp>
#include <kimura/girsanov.hpp>
#include <kimura/holder.hpp>
#include <kimura/io.hpp>

namespace kimura {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Command, const char*>> kCommandNames = {
    {Command::kValidate, "validate"}, {Command::kSimulate, "simulate"}, {Command::kDiagnose, "diagnose"},
    {Command::kCompare, "compare"},   {Command::kHolder, "holder"},     {Command::kReport, "report"},
};

constexpr int kValidatorSamples = 512;

std::vector<StatePoint> validator_samples(const CoefficientModel& model) {
  auto samples = box_samples(model.n, model.m, kValidatorSamples, 10.0, 1e-6);
  auto faces = boundary_samples(model.n, model.m, kValidatorSamples, 10.0);
  samples.insert(samples.end(), faces.begin(), faces.end());
  return samples;
}

double lambda_for(const RunConfig& config, const CoefficientModel& model) {
  if (config.tolerances.count("lambda")) {
    return config.tolerances.at("lambda");
  }
  const auto samples = box_samples(model.n, model.m, kValidatorSamples, 10.0, 1e-6);
  const double lambda = default_lambda(model, samples);
  return lambda > 0.0 ? lambda : 1.0;
}

// Lazily simulated bundles shared by the experiments of one run.
class Workspace {
 public:
  Workspace(const RunConfig& config, const CoefficientModel& model) : config_(config), model_(model) {}

  const PathBundle& standard() {
    if (!standard_) {
      standard_ = simulate_standard(model_, config_.sim, config_.initial_state);
    }
    return *standard_;
  }

  const WeightedPathBundle& weighted() {
    if (!weighted_) {
      weighted_ = simulate_weighted(model_, config_.sim, config_.initial_state, WeightDirection::kStandardToSingular,
                                    0, config_.sim.n_paths);
    }
    return *weighted_;
  }

 private:
  const RunConfig& config_;
  const CoefficientModel& model_;
  std::optional<PathBundle> standard_;
  std::optional<WeightedPathBundle> weighted_;
};

std::vector<double> terminal_x1(const PathBundle& bundle, const std::vector<std::uint8_t>& skip = {}) {
  const auto all = bundle.terminal_values(0);
  std::vector<double> out;
  out.reserve(all.size());
  for (std::size_t p = 0; p < all.size(); ++p) {
    if (skip.empty() || !skip[p]) {
      out.push_back(all[p]);
    }
  }
  return out;
}

DiagnosticReport girsanov_compare(const RunConfig& config, const CoefficientModel& model, Workspace& ws) {
  if (!model.is_singular()) {
    throw InvalidArgumentError("girsanov-compare needs a model with a singular drift");
  }
  const WeightedPathBundle& wb = ws.weighted();
  const auto a = terminal_x1(wb.base, wb.excluded);
  const auto lw = wb.terminal_log_weights();
  const double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(lw[i] - top);
  }
  SimConfig direct_cfg = config.sim;
  direct_cfg.master_seed = mix64(config.sim.master_seed ^ 0x9e3779b97f4a7c15ULL);
  direct_cfg.record_stride = direct_cfg.steps();
  direct_cfg.retain_increments = false;
  const PathBundle direct = simulate_singular(model, direct_cfg, config.initial_state);
  DiagnosticReport report = marginal_compare(a, w, terminal_x1(direct), config.tolerance("alpha_ks", 0.01));
  report.name = "girsanov-compare";
  report.metadata["excluded_fraction"] = wb.excluded_fraction();
  return report;
}

std::vector<DiagnosticReport> run_experiment(Experiment experiment, const RunConfig& config,
                                             const CoefficientModel& model, Workspace& ws,
                                             std::vector<HolderNormRow>& norm_rows) {
  const double q = model.declared.q;
  const double delta = config.tolerance("delta", 0.5);
  switch (experiment) {
    case Experiment::kKhasminskii:
      return {khasminskii_estimate(ws.standard(), q, lambda_for(config, model), delta)};
    case Experiment::kNovikov:
      return {novikov_estimate(ws.standard(), q, lambda_for(config, model), config.sim.epsilon_floor,
                               config.tolerance("novikov_bound", 1.0 / (1.0 - delta)))};
    case Experiment::kSupport:
      return {support_report(ws.standard(), config.tolerance("c_tol", 5.0 * model.declared.K))};
    case Experiment::kMartingaleResidual: {
      ResidualOptions options;
      options.c_dt = config.tolerance("c_dt", 1.0);
      const TestFunction u = smooth_bump(config.initial_state, config.tolerance("bump_radius", 1.0));
      return {martingale_residual(model, u, config.initial_state, config.sim, options)};
    }
    case Experiment::kGirsanovCompare:
      return {girsanov_compare(config, model, ws)};
    case Experiment::kRestart: {
      const SdeKind kind = model.is_singular() ? SdeKind::kSingular : SdeKind::kStandard;
      return {restart_consistency(model, config.initial_state, config.tolerance("t_split", 0.5 * config.sim.horizon_T),
                                  config.sim, kind, config.tolerance("alpha_ks", 0.01))};
    }
    case Experiment::kHolderValidate: {
      HolderGridSpec spec;
      spec.levels = static_cast<int>(config.tolerance("holder_levels", spec.levels));
      HolderValidation v = validate_coefficient_holder(model, config.tolerance("holder_alpha", model.declared.alpha), spec);
      norm_rows.insert(norm_rows.end(), v.rows.begin(), v.rows.end());
      return {v.report};
    }
  }
  return {};
}

template <typename Writer>
std::string write_file(const fs::path& dir, const std::string& name, Writer&& writer) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  writer(out);
  if (!out) {
    throw Error("error while writing '" + path.string() + "'");
  }
  return path.string();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* to_string(Command command) {
  for (const auto& [c, name] : kCommandNames) {
    if (c == command) {
      return name;
    }
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (const auto& [c, text] : kCommandNames) {
    if (name == text) {
      return c;
    }
  }
  throw ConfigError("unknown command '" + name + "'");
}

int exit_code_for(const std::vector<DiagnosticReport>& reports) {
  bool inconclusive = false;
  for (const auto& r : reports) {
    if (r.verdict == Verdict::kFail) {
      return 1;
    }
    inconclusive = inconclusive || r.verdict == Verdict::kInconclusive;
  }
  return inconclusive ? 2 : 0;
}

std::vector<DiagnosticReport> validate_model(const RunConfig& config) {
  const CoefficientModel model = make_model(config.model_name, config.model_params);
  const auto samples = validator_samples(model);
  std::vector<DiagnosticReport> reports;

  DiagnosticReport q_report;
  q_report.name = "q-admissible";
  q_report.estimate = model.declared.q;
  q_report.bound = compute_q0(model.declared.b0, model.declared.K, model.n, model.m);
  q_report.verdict = verdict_from_bool(q_report.estimate > 0.0 && q_report.estimate < q_report.bound);
  reports.push_back(q_report);

  const auto faces = boundary_samples(model.n, model.m, kValidatorSamples, 10.0);
  reports.push_back(check_drift_boundary(model, faces, DriftCheckMode::kPositive));
  reports.push_back(check_ellipticity(model, samples));
  if (model.is_singular()) {
    const auto grid = log_spaced(1e-8, 10.0, 200);
    reports.push_back(check_singular_bounds(model, samples, model.declared.q, grid));
    reports.push_back(
        check_theta_bound(model, samples, lambda_for(config, model), model.declared.q, config.sim.epsilon_floor));
  }
  return reports;
}

RunOutcome run(const RunConfig& config, Command command) {
  if (command == Command::kReport) {
    return read_report(config.output_dir);
  }
  const CoefficientModel model = make_model(config.model_name, config.model_params);
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  RunOutcome outcome;
  outcome.reports = validate_model(config);
  Workspace ws(config, model);
  std::vector<HolderNormRow> norm_rows;

  std::vector<Experiment> experiments;
  switch (command) {
    case Command::kDiagnose:
      experiments = config.experiments;
      break;
    case Command::kCompare:
      experiments = {Experiment::kGirsanovCompare};
      break;
    case Command::kHolder:
      experiments = {Experiment::kHolderValidate};
      break;
    default:
      break;
  }
  for (Experiment e : experiments) {
    try {
      auto reports = run_experiment(e, config, model, ws, norm_rows);
      outcome.reports.insert(outcome.reports.end(), reports.begin(), reports.end());
    } catch (const Error& err) {
      throw Error(std::string("experiment '") + to_string(e) + "' failed: " + err.what());
    }
  }

  const bool paths = config.write_paths || command == Command::kSimulate;
  const bool weights = (config.write_weights || command == Command::kSimulate) && model.is_singular();
  if (weights) {
    const WeightedPathBundle& wb = ws.weighted();
    outcome.written.push_back(write_file(dir, "weights.csv", [&](std::ostream& out) { write_weights_csv(out, wb); }));
    if (paths) {
      outcome.written.push_back(
          write_file(dir, "paths.csv", [&](std::ostream& out) { write_paths_csv(out, wb.base); }));
    }
  } else if (paths) {
    const PathBundle& bundle = ws.standard();
    outcome.written.push_back(write_file(dir, "paths.csv", [&](std::ostream& out) { write_paths_csv(out, bundle); }));
  }
  if (!norm_rows.empty()) {
    outcome.written.push_back(
        write_file(dir, "norms.csv", [&](std::ostream& out) { write_norms_csv(out, norm_rows); }));
  }
  outcome.written.push_back(write_file(
      dir, "report.json", [&](std::ostream& out) { out << reports_to_json_text(outcome.reports); }));
  // Timestamps live outside report.json so that reruns are byte-identical.
  outcome.written.push_back(write_file(dir, "run_meta.json", [&](std::ostream& out) {
    nlohmann::ordered_json meta;
    meta["command"] = to_string(command);
    meta["model"] = config.model_name;
    meta["master_seed"] = config.sim.master_seed;
    meta["workers"] = config.sim.workers;
    meta["finished_utc"] = utc_timestamp();
    out << meta.dump(2) << '\n';
  }));
  outcome.exit_code = exit_code_for(outcome.reports);
  return outcome;
}

RunOutcome read_report(const std::string& output_dir) {
  const fs::path path = fs::path(output_dir) / "report.json";
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot read '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  RunOutcome outcome;
  outcome.reports = reports_from_json_text(buffer.str());
  outcome.exit_code = exit_code_for(outcome.reports);
  return outcome;
}

}  // namespace kimura
