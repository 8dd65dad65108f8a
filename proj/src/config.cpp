#include <kimura/config.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <kimura/errors.hpp>

namespace kimura {

namespace {

using nlohmann::json;

const std::vector<std::pair<Experiment, const char*>> kExperimentNames = {
    {Experiment::kKhasminskii, "khasminskii"},
    {Experiment::kNovikov, "novikov"},
    {Experiment::kSupport, "support"},
    {Experiment::kMartingaleResidual, "martingale-residual"},
    {Experiment::kGirsanovCompare, "girsanov-compare"},
    {Experiment::kRestart, "restart"},
    {Experiment::kHolderValidate, "holder-validate"},
};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(where + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError("missing required key '" + key + "' in " + where);
  }
  return obj.at(key);
}

template <typename T>
T as(const json& value, const std::string& what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(what + " has the wrong type");
  }
}

double number(const json& value, const std::string& what) {
  if (!value.is_number()) {
    throw ConfigError(what + " must be a number");
  }
  return value.get<double>();
}

Vector vector_of(const json& value, const std::string& what) {
  if (!value.is_array()) {
    throw ConfigError(what + " must be an array of numbers");
  }
  Vector out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number(value[i], what);
  }
  return out;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

const char* to_string(Experiment experiment) {
  for (const auto& [e, name] : kExperimentNames) {
    if (e == experiment) {
      return name;
    }
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& [e, text] : kExperimentNames) {
    if (name == text) {
      return e;
    }
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

const std::vector<std::string>& tolerance_keys() {
  static const std::vector<std::string> keys = {
      "alpha_ks", "bump_radius", "c_dt", "c_tol", "delta", "holder_alpha", "holder_levels", "lambda",
      "novikov_bound", "t_split"};
  return keys;
}

double RunConfig::tolerance(const std::string& key, double fallback) const {
  const auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
  check_keys(doc, "config",
             {"model_name", "model_params", "initial_state", "sim", "experiments", "output_dir", "tolerances",
              "outputs"});
  RunConfig cfg;
  cfg.model_name = as<std::string>(require(doc, "model_name", "config"), "model_name");
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), cfg.model_name) == names.end()) {
    throw ConfigError("unknown model '" + cfg.model_name + "'");
  }

  const json& params = require(doc, "model_params", "config");
  if (!params.is_object()) {
    throw ConfigError("model_params must be a JSON object");
  }
  for (const auto& [key, value] : params.items()) {
    cfg.model_params[key] = number(value, "model_params." + key);
  }
  if (!cfg.model_params.count("q")) {
    throw ConfigError("model_params.q must be given explicitly");
  }
  CoefficientModel model;
  try {
    model = make_model(cfg.model_name, cfg.model_params);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const double q = model.declared.q;
  const double q0 = compute_q0(model.declared.b0, model.declared.K, model.n, model.m);
  if (!(q > 0.0) || !(q < q0)) {
    throw ConfigError("q = " + std::to_string(q) + " violates 0 < q < q0 = min{1/4, b0/((n+m)K^2)} = " +
                      std::to_string(q0));
  }

  const json& init = require(doc, "initial_state", "config");
  check_keys(init, "initial_state", {"x", "y"});
  const Vector x = vector_of(require(init, "x", "initial_state"), "initial_state.x");
  const Vector y = init.contains("y") ? vector_of(init.at("y"), "initial_state.y") : Vector(0);
  if (x.size() != model.n || y.size() != model.m) {
    throw ConfigError("initial_state has the wrong dimensions for model '" + cfg.model_name + "'");
  }
  cfg.initial_state = StatePoint(x, y);
  if (!cfg.initial_state.canonical()) {
    throw ConfigError("initial_state.x must be nonnegative");
  }

  const json& sim = require(doc, "sim", "config");
  check_keys(sim, "sim",
             {"horizon_T", "dt", "n_paths", "master_seed", "clamp_mode", "epsilon_floor", "record_stride",
              "retain_increments", "workers"});
  cfg.sim.horizon_T = number(require(sim, "horizon_T", "sim"), "sim.horizon_T");
  cfg.sim.dt = number(require(sim, "dt", "sim"), "sim.dt");
  cfg.sim.n_paths = as<std::size_t>(require(sim, "n_paths", "sim"), "sim.n_paths");
  if (sim.contains("master_seed")) {
    cfg.sim.master_seed = as<std::uint64_t>(sim.at("master_seed"), "sim.master_seed");
  }
  if (sim.contains("clamp_mode")) {
    const auto mode = as<std::string>(sim.at("clamp_mode"), "sim.clamp_mode");
    if (mode == "post-step-clamp") {
      cfg.sim.clamp_mode = ClampMode::kPostStepClamp;
    } else if (mode == "record-only") {
      cfg.sim.clamp_mode = ClampMode::kRecordOnly;
    } else {
      throw ConfigError("sim.clamp_mode must be 'post-step-clamp' or 'record-only'");
    }
  }
  if (sim.contains("epsilon_floor")) {
    cfg.sim.epsilon_floor = number(sim.at("epsilon_floor"), "sim.epsilon_floor");
  }
  if (sim.contains("record_stride")) {
    cfg.sim.record_stride = as<int>(sim.at("record_stride"), "sim.record_stride");
  }
  if (sim.contains("retain_increments")) {
    cfg.sim.retain_increments = as<bool>(sim.at("retain_increments"), "sim.retain_increments");
  }
  if (sim.contains("workers")) {
    cfg.sim.workers = as<int>(sim.at("workers"), "sim.workers");
  }
  try {
    cfg.sim.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("experiments")) {
    const json& list = doc.at("experiments");
    if (!list.is_array()) {
      throw ConfigError("experiments must be an array of names");
    }
    for (const auto& item : list) {
      cfg.experiments.push_back(experiment_from_string(as<std::string>(item, "experiment name")));
    }
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = as<std::string>(doc.at("output_dir"), "output_dir");
  }
  if (doc.contains("tolerances")) {
    const json& tol = doc.at("tolerances");
    const auto& keys = tolerance_keys();
    check_keys(tol, "tolerances", std::set<std::string>(keys.begin(), keys.end()));
    for (const auto& [key, value] : tol.items()) {
      cfg.tolerances[key] = number(value, "tolerances." + key);
    }
  }
  if (doc.contains("outputs")) {
    const json& outputs = doc.at("outputs");
    check_keys(outputs, "outputs", {"paths", "weights"});
    cfg.write_paths = outputs.contains("paths") && as<bool>(outputs.at("paths"), "outputs.paths");
    cfg.write_weights = outputs.contains("weights") && as<bool>(outputs.at("weights"), "outputs.weights");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace kimura
