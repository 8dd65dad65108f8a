#include <kimura/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <kimura/errors.hpp>
#include <kimura/parallel.hpp>

namespace kimura {

namespace {

double potential(const double* x, int n, double q, double lambda, double floor) {
  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    v += std::pow(std::max(x[i], floor), -2.0 * q);
  }
  return lambda * v;
}

std::vector<double> column(const std::vector<double>& table, std::size_t rows, std::size_t cols, std::size_t c) {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = table[r * cols + c];
  }
  return out;
}

}  // namespace

std::vector<double> additive_functional(const PathBundle& bundle, double q, double lambda, double epsilon_floor) {
  const std::size_t rec = bundle.n_recorded();
  const int d = bundle.dim();
  std::vector<double> out(bundle.n_paths() * rec, 0.0);
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    const double* states = bundle.states.data() + p * rec * d;
    double acc = 0.0;
    double left = potential(states, bundle.n, q, lambda, epsilon_floor);
    for (std::size_t r = 1; r < rec; ++r) {
      const double right = potential(states + r * d, bundle.n, q, lambda, epsilon_floor);
      acc += 0.5 * (left + right) * (bundle.times[r] - bundle.times[r - 1]);
      out[p * rec + r] = acc;
      left = right;
    }
  }
  return out;
}

std::vector<MeanEstimate> khasminskii_profile(const PathBundle& bundle, double q, double lambda,
                                              double epsilon_floor) {
  const std::vector<double> table = additive_functional(bundle, q, lambda, epsilon_floor);
  std::vector<MeanEstimate> out;
  for (std::size_t r = 0; r < bundle.n_recorded(); ++r) {
    out.push_back(mean_and_stderr(column(table, bundle.n_paths(), bundle.n_recorded(), r)));
  }
  return out;
}

DiagnosticReport khasminskii_estimate(const PathBundle& bundle, double q, double lambda, double delta,
                                      const std::vector<double>& floors) {
  if (bundle.n_paths() == 0) {
    throw InvalidArgumentError("khasminskii_estimate: empty bundle");
  }
  const std::size_t last = bundle.n_recorded() - 1;
  auto at_floor = [&](double floor) {
    return mean_and_stderr(column(additive_functional(bundle, q, lambda, floor), bundle.n_paths(),
                                  bundle.n_recorded(), last));
  };
  const MeanEstimate main = at_floor(bundle.epsilon_floor);
  DiagnosticReport report;
  report.name = "khasminskii";
  report.estimate = main.mean;
  report.stderr_ = main.stderr_;
  report.bound = delta;
  report.verdict = verdict_at_most(main.mean, main.stderr_, delta);
  double spread = 0.0;
  for (double floor : floors) {
    const MeanEstimate e = at_floor(floor);
    char key[48];
    std::snprintf(key, sizeof key, "estimate_floor_%.0e", floor);
    report.metadata[key] = e.mean;
    spread = std::max(spread, std::abs(e.mean - main.mean) / std::max(std::abs(main.mean), 1e-300));
  }
  report.metadata["floor_relative_change"] = spread;
  report.metadata["T"] = bundle.times.back();
  report.metadata["q"] = q;
  report.metadata["lambda"] = lambda;
  report.metadata["dt"] = bundle.dt;
  report.metadata["n_paths"] = static_cast<std::uint64_t>(bundle.n_paths());
  report.metadata["epsilon_floor"] = bundle.epsilon_floor;
  return report;
}

double khasminskii_bound(double r, double T, double q, double b0, double rho, double K, int n, int m, double C) {
  if (!(r > 0.0 && r < 1.0) || !(q > 0.0 && q < 0.5) || !(rho > 0.0) || !(T >= 0.0) || !(C >= 0.0)) {
    throw InfeasibleParameterError("khasminskii_bound needs r in (0,1), q in (0,1/2), rho > 0, T >= 0, C >= 0");
  }
  const double margin = b0 / (1.0 + rho) - q * (n + m) * K * K;
  if (!(margin > 0.0)) {
    throw InfeasibleParameterError("khasminskii_bound: b0 / (1 + rho) - q (n + m) K^2 = " + std::to_string(margin) +
                                   " is not positive");
  }
  return (std::pow(r, 1.0 - 2.0 * q) + C * std::pow(r, -2.0 * q) * T) / ((1.0 - 2.0 * q) * margin);
}

double fit_khasminskii_C(std::span<const double> horizons, std::span<const double> estimates, double r, double q,
                         double b0, double rho, double K, int n, int m) {
  if (horizons.size() != estimates.size() || horizons.empty()) {
    throw DimensionError("fit_khasminskii_C: mismatched inputs");
  }
  const double at_zero = khasminskii_bound(r, 0.0, q, b0, rho, K, n, m, 0.0);
  const double per_C = khasminskii_bound(r, 1.0, q, b0, rho, K, n, m, 1.0) - at_zero;  // bound slope in C * T
  double C = 0.0;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (horizons[k] > 0.0) {
      C = std::max(C, (estimates[k] - at_zero) / (per_C * horizons[k]));
    }
  }
  return C;
}

DiagnosticReport novikov_estimate(const PathBundle& bundle, double q, double lambda, double epsilon_floor,
                                  double bound) {
  const std::vector<double> integrals =
      column(additive_functional(bundle, q, lambda, epsilon_floor), bundle.n_paths(), bundle.n_recorded(),
             bundle.n_recorded() - 1);
  std::vector<double> values(integrals.size());
  std::transform(integrals.begin(), integrals.end(), values.begin(), [](double v) { return std::exp(v); });
  const MeanEstimate m = mean_and_stderr(values);
  DiagnosticReport report;
  report.name = "novikov";
  report.estimate = m.mean;
  report.stderr_ = m.stderr_;
  report.bound = bound;
  report.verdict = bound > 0.0 ? verdict_at_most(m.mean, m.stderr_, bound) : verdict_from_bool(std::isfinite(m.mean));
  report.metadata["integral_q999"] = quantile(integrals, 0.999);
  report.metadata["T"] = bundle.times.back();
  report.metadata["q"] = q;
  report.metadata["lambda"] = lambda;
  report.metadata["n_paths"] = static_cast<std::uint64_t>(bundle.n_paths());
  return report;
}

double novikov_chain_bound(double delta, double T, double T_delta) {
  if (!(delta > 0.0 && delta < 1.0) || !(T > 0.0) || !(T_delta > 0.0)) {
    throw InvalidArgumentError("novikov_chain_bound needs delta in (0,1) and T, T_delta > 0");
  }
  const double k = std::ceil(T / T_delta - 1e-12);
  return std::pow(1.0 - delta, -k);
}

DiagnosticReport support_report(const PathBundle& bundle, double c_tol) {
  if (bundle.n_paths() == 0) {
    throw InvalidArgumentError("support_report: empty bundle");
  }
  const double q999 = quantile(bundle.negativity, 0.999);
  const double worst = *std::max_element(bundle.negativity.begin(), bundle.negativity.end());
  const double hits = std::accumulate(bundle.boundary_hits.begin(), bundle.boundary_hits.end(), 0.0);
  DiagnosticReport report;
  report.name = "support";
  report.estimate = q999;
  report.bound = c_tol * std::sqrt(bundle.dt);
  report.verdict = verdict_from_bool(q999 <= report.bound);
  report.metadata["max_negativity"] = worst;
  report.metadata["boundary_hit_frequency"] = hits / (static_cast<double>(bundle.n_paths()) * bundle.steps);
  report.metadata["dt"] = bundle.dt;
  report.metadata["clamp_mode"] = std::string(to_string(bundle.clamp_mode));
  report.metadata["n_paths"] = static_cast<std::uint64_t>(bundle.n_paths());
  return report;
}

DiagnosticReport martingale_residual(const CoefficientModel& model, const TestFunction& u, const StatePoint& z0,
                                     const SimConfig& cfg, const ResidualOptions& options) {
  cfg.validate();
  if (model.is_singular()) {
    throw InvalidArgumentError("martingale_residual applies to standard models");
  }
  const int steps = cfg.steps();
  const double dt = cfg.step_size();
  const double u0 = u.value(z0);
  std::vector<double> residuals(cfg.n_paths, 0.0);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t p) {
    double integral = 0.0;
    double cv = 0.0;
    double lu_left = apply_generator(model, u, project(z0));
    StatePoint last = z0;
    run_path(model, cfg, SdeKind::kStandard, z0, stream_key(cfg.master_seed, p), steps, dt, 0.0,
             static_cast<long long>(p),
             [&](int, double, const StatePoint& z, const Vector& dW, const Vector&, const StatePoint& next) {
               const StatePoint zp = project(z);
               const double lu_right = apply_generator(model, u, project(next));
               integral += 0.5 * (lu_left + lu_right) * dt;
               lu_left = lu_right;
               if (options.control_variate) {
                 const Matrix varsigma = assemble_varsigma(model, zp);
                 const Vector noise = varsigma * dW;
                 const Matrix h = u.hessian(zp);
                 cv += u.gradient(zp).dot(noise) + 0.5 * noise.dot(h * noise) -
                       0.5 * (varsigma.transpose() * h * varsigma).trace() * dt;
               }
               last = next;
             });
    residuals[p] = u.value(last) - u0 - options.generator_scale * integral - cv;
  });
  const MeanEstimate m = mean_and_stderr(residuals);
  DiagnosticReport report;
  report.name = "martingale-residual";
  report.estimate = m.mean;
  report.stderr_ = m.stderr_;
  report.bound = 3.0 * m.stderr_ + options.c_dt * dt;
  report.verdict = verdict_from_bool(std::abs(m.mean) <= report.bound);
  report.metadata["dt"] = dt;
  report.metadata["c_dt"] = options.c_dt;
  report.metadata["generator_scale"] = options.generator_scale;
  report.metadata["n_paths"] = static_cast<std::uint64_t>(cfg.n_paths);
  report.metadata["control_variate"] = static_cast<std::int64_t>(options.control_variate);
  return report;
}

double fit_c_dt(std::span<const double> dts, std::span<const double> residuals) {
  if (dts.size() != residuals.size() || dts.empty()) {
    throw DimensionError("fit_c_dt: mismatched inputs");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    num += dts[k] * std::abs(residuals[k]);
    den += dts[k] * dts[k];
  }
  return num / den;
}

double ks_critical_value(double alpha, double n_a, double n_b) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(n_a > 0.0) || !(n_b > 0.0)) {
    throw InvalidArgumentError("ks_critical_value needs alpha in (0,1) and positive sizes");
  }
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt((n_a + n_b) / (n_a * n_b));
}

double weighted_ks_statistic(std::span<const double> a, std::span<const double> weights_a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw InvalidArgumentError("weighted_ks_statistic: empty sample");
  }
  if (!weights_a.empty() && weights_a.size() != a.size()) {
    throw DimensionError("weighted_ks_statistic: weight length mismatch");
  }
  std::vector<std::pair<double, double>> wa(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = weights_a.empty() ? 1.0 : weights_a[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgumentError("weighted_ks_statistic: weights must be finite and nonnegative");
    }
    wa[i] = {a[i], w};
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvalidArgumentError("weighted_ks_statistic: all weights are zero");
  }
  std::sort(wa.begin(), wa.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sb.begin(), sb.end());
  const double nb = static_cast<double>(sb.size());
  double fa = 0.0;
  double fb = 0.0;
  double stat = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < wa.size() || j < sb.size()) {
    const double v = j == sb.size() || (i < wa.size() && wa[i].first <= sb[j]) ? wa[i].first : sb[j];
    while (i < wa.size() && wa[i].first == v) {
      fa += wa[i++].second;
    }
    while (j < sb.size() && sb[j] == v) {
      fb += 1.0;
      ++j;
    }
    stat = std::max(stat, std::abs(fa / total - fb / nb));
  }
  return stat;
}

DiagnosticReport marginal_compare(std::span<const double> a, std::span<const double> weights_a,
                                  std::span<const double> b, double alpha) {
  if (a.empty() || b.empty()) {
    throw InvalidArgumentError("marginal_compare: empty sample");
  }
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax && *bmin == *bmax && *amin == *bmin) {
    throw EstimationError("marginal_compare: both samples are the same constant");
  }
  const double n_a = weights_a.empty() ? static_cast<double>(a.size()) : ess(weights_a);
  const double n_b = static_cast<double>(b.size());
  DiagnosticReport report;
  report.name = "marginal-ks";
  report.estimate = weighted_ks_statistic(a, weights_a, b);
  report.bound = ks_critical_value(alpha, n_a, n_b);
  report.verdict = verdict_from_bool(report.estimate <= report.bound);
  report.metadata["n_eff_a"] = n_a;
  report.metadata["n_b"] = n_b;
  report.metadata["alpha"] = alpha;
  return report;
}

DiagnosticReport restart_consistency(const CoefficientModel& model, const StatePoint& z0, double t_split,
                                     const SimConfig& cfg, SdeKind kind, double alpha) {
  cfg.validate();
  const int steps = cfg.steps();
  const double dt = cfg.step_size();
  if (!(t_split >= 0.0) || t_split > cfg.horizon_T) {
    throw InvalidArgumentError("restart_consistency needs 0 <= t_split <= T");
  }
  const int split = static_cast<int>(std::llround(t_split / dt));
  const int d = model.dim();
  const std::size_t paths = cfg.n_paths;
  std::vector<double> a(paths * d);
  std::vector<double> b(paths * d);
  // Branch B draws its first leg independently of branch A so the two terminal samples
  // are independent, as the KS test assumes.
  const std::uint64_t first_leg_seed = mix64(cfg.master_seed ^ 0x2545f4914f6cdd1dULL);
  const std::uint64_t restart_seed = mix64(cfg.master_seed ^ 0x5851f42d4c957f2dULL);
  parallel_for(paths, cfg.workers, [&](std::size_t p) {
    StatePoint end = z0;
    run_path(model, cfg, kind, z0, stream_key(cfg.master_seed, p), steps, dt, 0.0, static_cast<long long>(p),
             [&](int, double, const StatePoint&, const Vector&, const Vector&, const StatePoint& next) { end = next; });
    Eigen::Map<Eigen::VectorXd>(a.data() + p * d, d) = end.stacked();
    StatePoint mid = z0;
    run_path(model, cfg, kind, z0, stream_key(first_leg_seed, p), split, dt, 0.0, static_cast<long long>(p),
             [&](int, double, const StatePoint&, const Vector&, const Vector&, const StatePoint& next) { mid = next; });
    end = mid;
    run_path(model, cfg, kind, mid, stream_key(restart_seed, p), steps - split, dt, split * dt,
             static_cast<long long>(p),
             [&](int, double, const StatePoint&, const Vector&, const Vector&, const StatePoint& next) { end = next; });
    Eigen::Map<Eigen::VectorXd>(b.data() + p * d, d) = end.stacked();
  });
  const double corrected = alpha / d;
  double worst_ratio = 0.0;
  DiagnosticReport report;
  report.name = "restart-consistency";
  bool ok = true;
  for (int c = 0; c < d; ++c) {
    std::vector<double> ac(paths);
    std::vector<double> bc(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      ac[p] = a[p * d + c];
      bc[p] = b[p * d + c];
    }
    const DiagnosticReport r = marginal_compare(ac, {}, bc, corrected);
    report.metadata["ks_coord_" + std::to_string(c + 1)] = r.estimate;
    const double ratio = r.estimate / r.bound;
    if (ratio >= worst_ratio) {
      worst_ratio = ratio;
      report.estimate = r.estimate;
      report.bound = r.bound;
    }
    ok = ok && r.passed();
  }
  report.verdict = verdict_from_bool(ok);
  report.metadata["t_split"] = split * dt;
  report.metadata["T"] = cfg.horizon_T;
  report.metadata["alpha"] = alpha;
  report.metadata["n_paths"] = static_cast<std::uint64_t>(paths);
  report.metadata["kind"] = std::string(to_string(kind));
  return report;
}

}  // namespace kimura
