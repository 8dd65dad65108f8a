#include <kimura/girsanov.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <kimura/errors.hpp>
#include <kimura/parallel.hpp>

namespace kimura {

namespace {

bool weight_out_of_range(double log_weight) {
  return !std::isfinite(log_weight) || std::abs(log_weight) > kLogWeightLimit;
}

// One step of the log weight given theta at the left endpoint.
double log_weight_step(const Vector& theta, const Vector& dW, double dt, WeightDirection direction) {
  const double sign = direction == WeightDirection::kStandardToSingular ? 1.0 : -1.0;
  return sign * theta.dot(dW) - 0.5 * theta.squaredNorm() * dt;
}

}  // namespace

const char* to_string(WeightDirection direction) {
  return direction == WeightDirection::kStandardToSingular ? "standard-to-singular" : "singular-to-standard";
}

Vector theta_eval(const CoefficientModel& model, const StatePoint& z, double epsilon_floor) {
  if (!model.singular) {
    return Vector::Zero(model.dim());
  }
  return solve_sigma(model.sigma(z), xi_eval(model, z, epsilon_floor));
}

std::size_t WeightedPathBundle::excluded_count() const {
  return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), std::uint8_t{1}));
}

double WeightedPathBundle::excluded_fraction() const {
  return n_paths() == 0 ? 0.0 : static_cast<double>(excluded_count()) / static_cast<double>(n_paths());
}

std::vector<double> WeightedPathBundle::terminal_log_weights() const {
  std::vector<double> out;
  out.reserve(n_paths());
  const std::size_t last = base.n_recorded() - 1;
  for (std::size_t p = 0; p < n_paths(); ++p) {
    if (!excluded[p]) {
      out.push_back(log_weight(p, last));
    }
  }
  return out;
}

WeightedPathBundle accumulate_log_weight(const PathBundle& bundle, const CoefficientModel& model,
                                         WeightDirection direction, int workers) {
  if (!bundle.has_increments() || bundle.record_stride != 1) {
    throw InvalidArgumentError("accumulate_log_weight needs retained increments and record_stride 1");
  }
  if (bundle.n != model.n || bundle.m != model.m) {
    throw DimensionError("bundle does not match model (n, m)");
  }
  WeightedPathBundle out;
  out.base = bundle;
  out.direction = direction;
  const std::size_t rec = bundle.n_recorded();
  out.log_weights.assign(bundle.n_paths() * rec, 0.0);
  out.excluded.assign(bundle.n_paths(), 0);
  parallel_for(bundle.n_paths(), workers, [&](std::size_t p) {
    double lw = 0.0;
    for (int k = 0; k < bundle.steps; ++k) {
      const StatePoint z = project(bundle.state(p, static_cast<std::size_t>(k)));
      lw += log_weight_step(theta_eval(model, z, bundle.epsilon_floor), bundle.increment(p, k), bundle.dt, direction);
      out.log_weights[p * rec + k + 1] = lw;
      if (weight_out_of_range(lw)) {
        out.excluded[p] = 1;
      }
    }
  });
  return out;
}

WeightedPathBundle simulate_weighted(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0,
                                     WeightDirection direction, std::size_t first_path, std::size_t count) {
  if (!model.singular) {
    throw InvalidArgumentError("simulate_weighted requires a model with f and h");
  }
  const SdeKind kind = direction == WeightDirection::kStandardToSingular ? SdeKind::kStandard : SdeKind::kSingular;
  // The record grid is known before simulating, so the weights can be written in place.
  const int steps = cfg.steps();
  std::vector<int> slot(static_cast<std::size_t>(steps) + 1, -1);
  int rec = 0;
  for (int k = 0; k <= steps; ++k) {
    if (k % cfg.record_stride == 0 || k == steps) {
      slot[static_cast<std::size_t>(k)] = rec++;
    }
  }
  std::vector<double> log_weights(count * static_cast<std::size_t>(rec), 0.0);
  std::vector<double> running(count, 0.0);
  std::vector<std::uint8_t> excluded(count, 0);
  PathBundle base = simulate_observed(
      model, cfg, z0, kind, first_path, count,
      [&](std::size_t i, int k, double, const StatePoint& z, const Vector& dW, const Vector&, const StatePoint&) {
        const StatePoint zp = project(z);
        running[i] += log_weight_step(theta_eval(model, zp, cfg.epsilon_floor), dW, cfg.step_size(), direction);
        if (weight_out_of_range(running[i])) {
          excluded[i] = 1;
        }
        const int s = slot[static_cast<std::size_t>(k) + 1];
        if (s >= 0) {
          log_weights[i * static_cast<std::size_t>(rec) + s] = running[i];
        }
      });
  WeightedPathBundle out;
  out.base = std::move(base);
  out.direction = direction;
  out.log_weights = std::move(log_weights);
  out.excluded = std::move(excluded);
  return out;
}

void append_weighted(WeightedPathBundle& into, const WeightedPathBundle& chunk) {
  if (into.n_paths() == 0 && into.base.times.empty()) {
    into = chunk;
    return;
  }
  if (into.direction != chunk.direction) {
    throw InvalidArgumentError("append_weighted: directions differ");
  }
  append_bundle(into.base, chunk.base);
  into.log_weights.insert(into.log_weights.end(), chunk.log_weights.begin(), chunk.log_weights.end());
  into.excluded.insert(into.excluded.end(), chunk.excluded.begin(), chunk.excluded.end());
}

PathBundle shift_increments(const PathBundle& bundle, const CoefficientModel& model) {
  if (!bundle.has_increments() || bundle.record_stride != 1) {
    throw InvalidArgumentError("shift_increments needs retained increments and record_stride 1");
  }
  PathBundle out = bundle;
  const double sign = bundle.kind == SdeKind::kStandard ? -1.0 : 1.0;
  out.kind = bundle.kind == SdeKind::kStandard ? SdeKind::kSingular : SdeKind::kStandard;
  const int d = bundle.dim();
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    for (int k = 0; k < bundle.steps; ++k) {
      const Vector theta = theta_eval(model, project(bundle.state(p, static_cast<std::size_t>(k))), bundle.epsilon_floor);
      double* inc = out.increments.data() + (p * static_cast<std::size_t>(bundle.steps) + k) * d;
      Eigen::Map<Eigen::VectorXd>(inc, d) += sign * bundle.dt * theta;
    }
  }
  return out;
}

WeightedEstimate reweighted_expectation(std::span<const double> log_weights, std::span<const double> values,
                                        Normalization normalization, std::span<const std::uint8_t> excluded) {
  if (log_weights.size() != values.size() || (!excluded.empty() && excluded.size() != values.size())) {
    throw DimensionError("reweighted_expectation: length mismatch");
  }
  std::vector<double> w;
  std::vector<double> f;
  WeightedEstimate out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if ((!excluded.empty() && excluded[i]) || weight_out_of_range(log_weights[i]) || !std::isfinite(values[i])) {
      ++out.excluded;
      continue;
    }
    w.push_back(std::exp(log_weights[i]));
    f.push_back(values[i]);
  }
  if (w.empty()) {
    throw EstimationError("reweighted_expectation: every path was excluded");
  }
  const double count = static_cast<double>(w.size());
  out.used = w.size();
  std::vector<double> wf(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    wf[i] = w[i] * f[i];
  }
  const MeanEstimate mw = mean_and_stderr(w);
  out.mean_weight = mw.mean;
  out.mean_weight_stderr = mw.stderr_;
  out.ess = ess(w);
  if (normalization == Normalization::kRaw) {
    const MeanEstimate m = mean_and_stderr(wf);
    out.estimate = m.mean;
    out.stderr_ = m.stderr_;
  } else {
    double sw = 0.0;
    double swf = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sw += w[i];
      swf += wf[i];
    }
    out.estimate = swf / sw;
    double var = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double r = w[i] * (f[i] - out.estimate);
      var += r * r;
    }
    out.stderr_ = std::sqrt(var) / sw;
    (void)count;
  }
  return out;
}

WeightedEstimate reweighted_expectation(const WeightedPathBundle& wbundle,
                                        const std::function<double(const PathBundle&, std::size_t)>& functional,
                                        Normalization normalization) {
  const std::size_t last = wbundle.base.n_recorded() - 1;
  std::vector<double> lw(wbundle.n_paths());
  std::vector<double> values(wbundle.n_paths());
  for (std::size_t p = 0; p < wbundle.n_paths(); ++p) {
    lw[p] = wbundle.log_weight(p, last);
    values[p] = functional(wbundle.base, p);
  }
  return reweighted_expectation(lw, values, normalization, wbundle.excluded);
}

double ess(std::span<const double> weights) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidArgumentError("ess: weights must be finite and nonnegative");
    }
    s1 += w;
    s2 += w * w;
  }
  if (!(s2 > 0.0)) {
    throw InvalidArgumentError("ess: all weights are zero");
  }
  return s1 * s1 / s2;
}

double ess_from_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    throw InvalidArgumentError("ess: empty weight set");
  }
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - top);
  }
  return ess(w);
}

double default_lambda(const CoefficientModel& model, std::span<const StatePoint> samples) {
  if (!model.singular) {
    return 0.0;
  }
  double sup = 0.0;
  for (const auto& z : samples) {
    if (!z.interior()) {
      continue;
    }
    const Matrix sigma = model.sigma(z);
    Eigen::PartialPivLU<Matrix> lu(sigma);
    if (!(lu.rcond() >= 1e-12)) {
      throw SingularMatrixError("default_lambda: sigma is singular at an interior sample");
    }
    sup = std::max(sup, Matrix(lu.solve(model.singular->f(z))).norm());
  }
  return model.declared.K0 * sup;
}

DiagnosticReport check_theta_bound(const CoefficientModel& model, std::span<const StatePoint> samples, double lambda,
                                   double q, double epsilon_floor) {
  double worst = 0.0;
  std::int64_t violations = 0;
  std::int64_t evaluated = 0;
  for (const auto& z : samples) {
    if (!z.interior()) {
      continue;
    }
    ++evaluated;
    const double norm = theta_eval(model, z, epsilon_floor).norm();
    double rhs = 0.0;
    for (int i = 0; i < model.n; ++i) {
      rhs += std::pow(z.x(i), -q);
    }
    rhs *= lambda;
    const double ratio = rhs > 0.0 ? norm / rhs : (norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    worst = std::max(worst, ratio);
    if (norm > rhs) {
      ++violations;
    }
  }
  DiagnosticReport report;
  report.name = "theta-bound";
  report.estimate = worst;
  report.bound = 1.0;
  report.verdict = verdict_from_bool(violations == 0);
  report.metadata["lambda"] = lambda;
  report.metadata["q"] = q;
  report.metadata["violations"] = violations;
  report.metadata["evaluated"] = evaluated;
  return report;
}

}  // namespace kimura
