#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <kimura/engine.hpp>
#include <kimura/girsanov.hpp>
#include <kimura/model.hpp>
#include <kimura/report.hpp>

namespace kimura {

/// Per path, the trapezoidal prefix integrals of Lambda sum_i max(X_i, floor)^(-2q) at
/// every recorded time; layout [path][recorded time], first entry 0.
std::vector<double> additive_functional(const PathBundle& bundle, double q, double lambda, double epsilon_floor);

/// Mean over paths of the additive functional at each recorded time.
std::vector<MeanEstimate> khasminskii_profile(const PathBundle& bundle, double q, double lambda,
                                              double epsilon_floor);

/// E[int_0^T Lambda sum_i X_i^(-2q) dt] at the bundle horizon, judged against delta. The
/// metadata carries the estimate at each floor of the sweep and the largest relative change.
DiagnosticReport khasminskii_estimate(const PathBundle& bundle, double q, double lambda, double delta = 0.5,
                                      const std::vector<double>& floors = {1e-6, 1e-8, 1e-10});

/// (r^(1-2q) + C r^(-2q) T) / ((1 - 2q)(b0 / (1 + rho) - q (n + m) K^2)).
double khasminskii_bound(double r, double T, double q, double b0, double rho, double K, int n, int m, double C);

/// Smallest C >= 0 making khasminskii_bound dominate the per-coordinate estimates at every T.
double fit_khasminskii_C(std::span<const double> horizons, std::span<const double> estimates, double r, double q,
                         double b0, double rho, double K, int n, int m);

/// Sample mean of exp(additive functional at the horizon) with its standard error; the
/// 0.999 quantile of the integral is reported in the metadata.
DiagnosticReport novikov_estimate(const PathBundle& bundle, double q, double lambda, double epsilon_floor = 1e-8,
                                  double bound = 0.0);

/// (1 - delta)^(-ceil(T / T_delta)).
double novikov_chain_bound(double delta, double T, double T_delta);

/// 0.999 quantile of the pre-clamp negativity against c_tol sqrt(dt).
DiagnosticReport support_report(const PathBundle& bundle, double c_tol);

struct ResidualOptions {
  double c_dt = 0.0;            // tolerance slope of the weak discretisation error
  double generator_scale = 1.0;  // 2 gives the negative control
  bool control_variate = true;   // subtract the zero-mean Ito-Taylor terms
};

/// E[u(Z_T)] - u(z0) - E[int_0^T L u(Z_s) ds] for a standard model, with PASS iff
/// |residual| <= 3 stderr + c_dt dt.
DiagnosticReport martingale_residual(const CoefficientModel& model, const TestFunction& u, const StatePoint& z0,
                                     const SimConfig& cfg, const ResidualOptions& options = {});

/// Least-squares slope through the origin of residual against dt.
double fit_c_dt(std::span<const double> dts, std::span<const double> residuals);

/// Asymptotic two-sample KS critical value at level alpha for sizes n_a and n_b.
double ks_critical_value(double alpha, double n_a, double n_b);

/// Weighted two-sample KS statistic; empty weights mean unit weights.
double weighted_ks_statistic(std::span<const double> a, std::span<const double> weights_a, std::span<const double> b);

/// KS comparison of a weighted sample A (n_eff = ESS) with an unweighted sample B.
DiagnosticReport marginal_compare(std::span<const double> a, std::span<const double> weights_a,
                                  std::span<const double> b, double alpha = 0.01);

/// Branch A runs each path to T on its own stream; branch B runs an independent first leg to
/// t_split and then restarts on a fresh stream from the state reached there. Terminal marginals are compared coordinate by coordinate with a
/// Bonferroni-corrected KS test.
DiagnosticReport restart_consistency(const CoefficientModel& model, const StatePoint& z0, double t_split,
                                     const SimConfig& cfg, SdeKind kind, double alpha = 0.01);

}  // namespace kimura
