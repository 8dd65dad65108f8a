#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <kimura/geometry.hpp>
#include <kimura/report.hpp>
#include <kimura/types.hpp>

namespace kimura {

/// Constants a model declares for the assumption validators.
struct DeclaredConstants {
  double b0 = 1.0;     ///< lower bound of b_i on {x_i = 0}
  double K = 1.0;      ///< bound on |b_i| and |sigma_jl|
  double K0 = 1.0;     ///< bound on |f|, |sigma^-1 f| and |h_ij(s)| s^q
  double q = 0.1;      ///< singularity exponent, must satisfy q < q0
  double alpha = 0.5;  ///< Hoelder exponent of the coefficients
};

/// Singular drift factors f (an (n+m) x n matrix field) and h_ij : (0, inf) -> R.
struct SingularDrift {
  std::function<Matrix(const StatePoint&)> f;
  std::function<double(int i, int j, double s)> h;
};

/// Analytic decomposition a_ij = delta_ij alpha_ii + tilde_alpha_ij sqrt(x_i x_j),
/// a_{i,n+l} = c_il sqrt(x_i) / 2, plus the free block a_{n+l,n+k}.
struct DecomposedDiffusion {
  std::function<Vector(const StatePoint&)> alpha_diag;   // n
  std::function<Matrix(const StatePoint&)> alpha_tilde;  // n x n
  std::function<Matrix(const StatePoint&)> c;            // n x m
  std::function<Matrix(const StatePoint&)> a_free;       // m x m
};

/// Drift depending on the running maximum of x along the path. Only used by
/// negative-control models that deliberately break the Markov property.
using HistoryDrift = std::function<Vector(const StatePoint& z, const Vector& running_max_x)>;

/// Coefficient bundle (b, e, sigma, f, h) of a generalized Kimura equation.
struct CoefficientModel {
  std::string name;
  int n = 1;
  int m = 0;
  std::function<Vector(const StatePoint&)> b;
  std::function<Vector(const StatePoint&)> e;
  std::function<Matrix(const StatePoint&)> sigma;
  std::optional<SingularDrift> singular;
  std::optional<DecomposedDiffusion> decomposition;
  HistoryDrift history_drift;
  DeclaredConstants declared;

  int dim() const { return n + m; }
  bool is_singular() const { return singular.has_value(); }

  /// Stacked (b(z), e(z)).
  Vector drift(const StatePoint& z) const;
};

/// Smooth test function with analytic derivatives.
struct TestFunction {
  std::function<double(const StatePoint&)> value;
  std::function<Vector(const StatePoint&)> gradient;
  std::function<Matrix(const StatePoint&)> hessian;
  double compact_support_radius = 1.0;
};

/// C-infinity bump exp(1 - 1 / (1 - |z - c|^2 / R^2)) supported in the ball of radius R.
TestFunction smooth_bump(const StatePoint& center, double radius);

/// a(z) = sigma(z) sigma(z)^T / 2.
Matrix assemble_a(const CoefficientModel& model, const StatePoint& z);

/// Rows 0..n-1 of sigma scaled by sqrt(x_i); free rows unchanged.
Matrix assemble_varsigma(const CoefficientModel& model, const StatePoint& z);

/// Diffusion matrix D = varsigma varsigma^T.
Matrix assemble_D(const CoefficientModel& model, const StatePoint& z);

/// B = diag(sqrt(x_1), ..., sqrt(x_n), 1, ..., 1).
Matrix boundary_scaling(const StatePoint& z);

/// Rebuilds a(z) from an analytic decomposition.
Matrix reassemble_a(const DecomposedDiffusion& decomposition, const StatePoint& z);

/// q0 = min{1/4, b0 / ((n + m) K^2)}.
double compute_q0(double b0, double K, int n, int m);

enum class DriftCheckMode { kNonneg, kPositive };

/// Minimum of b_i over samples with x_i = 0; PASS iff it is >= 0 (kNonneg) or >= declared b0 (kPositive).
DiagnosticReport check_drift_boundary(const CoefficientModel& model, std::span<const StatePoint> samples,
                                      DriftCheckMode mode);

/// Region-dependent ellipticity quadratic form in (xi, eta) as a symmetric matrix.
Matrix ellipticity_form(const DecomposedDiffusion& decomposition, const StatePoint& z, const RegionIndex& region);

/// Minimum eigenvalue of the ellipticity form over the samples; PASS iff positive. Without a
/// decomposition the minimum eigenvalue of a(z) is used instead.
DiagnosticReport check_ellipticity(const CoefficientModel& model, std::span<const StatePoint> samples,
                                   double consistency_tolerance = 1e-10);

/// max over samples of |b_i(z)| and |sigma_jl(z)|.
double estimate_K(const CoefficientModel& model, std::span<const StatePoint> samples);

/// sup |f|, sup |sigma^-1 f| (interior samples) and sup |h_ij(s)| s^q over s_grid, each against K0.
DiagnosticReport check_singular_bounds(const CoefficientModel& model, std::span<const StatePoint> samples, double q,
                                       std::span<const double> s_grid);

/// sigma(z)^-1 at an interior point.
Matrix invert_sigma(const CoefficientModel& model, const StatePoint& z);

/// Solves sigma x = rhs, raising SingularMatrixError when the reciprocal condition
/// estimate falls below 1e-12.
Vector solve_sigma(const Matrix& sigma, const Vector& rhs);

/// The Kimura generator applied to u at z, written in terms of a(z).
double apply_generator(const CoefficientModel& model, const TestFunction& u, const StatePoint& z);

/// The same operator written through the analytic decomposition.
double apply_generator_structured(const CoefficientModel& model, const TestFunction& u, const StatePoint& z);

/// Low-discrepancy points on the faces {x_i = 0} of the box [0, R]^n x [-R, R]^m,
/// cycling through the faces.
std::vector<StatePoint> boundary_samples(int n, int m, int count, double R = 10.0);

/// Low-discrepancy points of the box [lo, R]^n x [-R, R]^m.
std::vector<StatePoint> box_samples(int n, int m, int count, double R = 10.0, double lo = 0.0);

/// count points log-spaced between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace kimura
