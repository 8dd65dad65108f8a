#include <kimura/model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <kimura/errors.hpp>

namespace kimura {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double fraction = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += static_cast<double>(index % base) * fraction;
    index /= base;
    fraction /= static_cast<double>(base);
  }
  return result;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

void require_dims(const CoefficientModel& model, const StatePoint& z) {
  if (z.n() != model.n || z.m() != model.m) {
    throw DimensionError("state point does not match model (n, m)");
  }
}

}  // namespace

Vector CoefficientModel::drift(const StatePoint& z) const {
  Vector out(dim());
  out.head(n) = b(z);
  if (m > 0) {
    out.tail(m) = e(z);
  }
  return out;
}

TestFunction smooth_bump(const StatePoint& center, double radius) {
  const int n = center.n();
  const double r2 = radius * radius;
  const Vector c = center.stacked();
  auto parts = [c, r2](const StatePoint& z, Vector& d, double& s) {
    d = z.stacked() - c;
    s = 1.0 - d.squaredNorm() / r2;
  };
  TestFunction u;
  u.compact_support_radius = radius;
  u.value = [parts](const StatePoint& z) {
    Vector d;
    double s;
    parts(z, d, s);
    return s > 0.0 ? std::exp(1.0 - 1.0 / s) : 0.0;
  };
  u.gradient = [parts, r2](const StatePoint& z) {
    Vector d;
    double s;
    parts(z, d, s);
    if (s <= 0.0) {
      return Vector(Vector::Zero(d.size()));
    }
    const double value = std::exp(1.0 - 1.0 / s);
    return Vector(-2.0 * value / (r2 * s * s) * d);
  };
  u.hessian = [parts, r2, n](const StatePoint& z) {
    (void)n;
    Vector d;
    double s;
    parts(z, d, s);
    const int dim = static_cast<int>(d.size());
    if (s <= 0.0) {
      return Matrix(Matrix::Zero(dim, dim));
    }
    const double value = std::exp(1.0 - 1.0 / s);
    const Vector phi = -2.0 / (r2 * s * s) * d;
    Matrix h = phi * phi.transpose();
    h.diagonal().array() -= 2.0 / (r2 * s * s);
    h -= 8.0 / (r2 * r2 * s * s * s) * (d * d.transpose());
    return Matrix(value * h);
  };
  return u;
}

Matrix assemble_a(const CoefficientModel& model, const StatePoint& z) {
  const Matrix sigma = model.sigma(z);
  return 0.5 * sigma * sigma.transpose();
}

Matrix assemble_varsigma(const CoefficientModel& model, const StatePoint& z) {
  Matrix out = model.sigma(z);
  for (int i = 0; i < model.n; ++i) {
    out.row(i) *= std::sqrt(std::max(z.x(i), 0.0));
  }
  return out;
}

Matrix assemble_D(const CoefficientModel& model, const StatePoint& z) {
  const Matrix varsigma = assemble_varsigma(model, z);
  return varsigma * varsigma.transpose();
}

Matrix boundary_scaling(const StatePoint& z) {
  Matrix out = Matrix::Identity(z.dim(), z.dim());
  for (int i = 0; i < z.n(); ++i) {
    out(i, i) = std::sqrt(std::max(z.x(i), 0.0));
  }
  return out;
}

Matrix reassemble_a(const DecomposedDiffusion& decomposition, const StatePoint& z) {
  const int n = z.n();
  const int m = z.m();
  Matrix a = Matrix::Zero(n + m, n + m);
  const Vector alpha = decomposition.alpha_diag(z);
  const Matrix alpha_tilde = decomposition.alpha_tilde(z);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = alpha_tilde(i, j) * std::sqrt(z.x(i) * z.x(j));
    }
    a(i, i) += alpha(i);
  }
  if (m > 0) {
    const Matrix c = decomposition.c(z);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < m; ++l) {
        a(i, n + l) = 0.5 * c(i, l) * std::sqrt(z.x(i));
        a(n + l, i) = a(i, n + l);
      }
    }
    a.bottomRightCorner(m, m) = decomposition.a_free(z);
  }
  return a;
}

double compute_q0(double b0, double K, int n, int m) {
  if (!(b0 > 0.0) || !(K > 0.0) || n + m < 1) {
    throw InfeasibleParameterError("compute_q0 requires b0 > 0, K > 0 and n + m >= 1");
  }
  return std::min(0.25, b0 / (static_cast<double>(n + m) * K * K));
}

DiagnosticReport check_drift_boundary(const CoefficientModel& model, std::span<const StatePoint> samples,
                                      DriftCheckMode mode) {
  if (samples.empty()) {
    throw InvalidArgumentError("check_drift_boundary: empty sample set");
  }
  double minimum = std::numeric_limits<double>::infinity();
  for (const auto& z : samples) {
    require_dims(model, z);
    const Vector b = model.b(z);
    bool on_face = false;
    for (int i = 0; i < model.n; ++i) {
      if (z.x(i) == 0.0) {
        on_face = true;
        minimum = std::min(minimum, b(i));
      }
    }
    if (!on_face) {
      throw InvalidArgumentError("check_drift_boundary: sample has no coordinate on a face {x_i = 0}");
    }
  }
  DiagnosticReport report;
  const bool positive = mode == DriftCheckMode::kPositive;
  report.name = positive ? "drift-boundary-positive" : "drift-boundary-nonneg";
  report.estimate = minimum;
  report.bound = positive ? model.declared.b0 : 0.0;
  report.verdict = verdict_from_bool(minimum >= report.bound);
  report.metadata["samples"] = static_cast<std::int64_t>(samples.size());
  return report;
}

Matrix ellipticity_form(const DecomposedDiffusion& decomposition, const StatePoint& z, const RegionIndex& region) {
  const int n = z.n();
  const int m = z.m();
  Matrix q = Matrix::Zero(n + m, n + m);
  const Vector alpha = decomposition.alpha_diag(z);
  const Matrix at = decomposition.alpha_tilde(z);
  for (int i = 0; i < n; ++i) {
    const bool in_i = region.contains(i);
    q(i, i) += in_i ? alpha(i) : z.x(i) * alpha(i);
    for (int j = 0; j < n; ++j) {
      const bool in_j = region.contains(j);
      double coeff = 0.0;
      if (in_i && in_j) {
        coeff = at(i, j);
      } else if (in_i && !in_j) {
        // the mixed sum carries x_j (alpha_ij + alpha_ji); split it symmetrically
        coeff = 0.5 * z.x(j) * (at(i, j) + at(j, i));
      } else if (!in_i && in_j) {
        coeff = 0.5 * z.x(i) * (at(i, j) + at(j, i));
      } else {
        coeff = z.x(i) * z.x(j) * at(i, j);
      }
      q(i, j) += 0.5 * coeff;
      q(j, i) += 0.5 * coeff;
    }
  }
  if (m > 0) {
    const Matrix c = decomposition.c(z);
    for (int i = 0; i < n; ++i) {
      const double scale = region.contains(i) ? 1.0 : z.x(i);
      for (int l = 0; l < m; ++l) {
        q(i, n + l) += 0.5 * scale * c(i, l);
        q(n + l, i) += 0.5 * scale * c(i, l);
      }
    }
    const Matrix af = decomposition.a_free(z);
    q.bottomRightCorner(m, m) += 0.5 * (af + af.transpose());
  }
  return q;
}

DiagnosticReport check_ellipticity(const CoefficientModel& model, std::span<const StatePoint> samples,
                                   double consistency_tolerance) {
  if (samples.empty()) {
    throw InvalidArgumentError("check_ellipticity: empty sample set");
  }
  double lambda = std::numeric_limits<double>::infinity();
  double inconsistency = 0.0;
  for (const auto& z : samples) {
    require_dims(model, z);
    Matrix form;
    if (model.decomposition) {
      const Matrix a = assemble_a(model, z);
      const Matrix rebuilt = reassemble_a(*model.decomposition, z);
      inconsistency = std::max(inconsistency, (a - rebuilt).cwiseAbs().maxCoeff());
      form = ellipticity_form(*model.decomposition, z, region_of(z));
    } else {
      form = assemble_a(model, z);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(form, Eigen::EigenvaluesOnly);
    lambda = std::min(lambda, solver.eigenvalues().minCoeff());
  }
  if (inconsistency > consistency_tolerance) {
    throw InvalidArgumentError("check_ellipticity: decomposition does not reproduce a(z) (max deviation " +
                               std::to_string(inconsistency) + ")");
  }
  DiagnosticReport report;
  report.name = "ellipticity";
  report.estimate = lambda;
  report.bound = 0.0;
  report.verdict = verdict_from_bool(lambda > 0.0);
  report.metadata["samples"] = static_cast<std::int64_t>(samples.size());
  report.metadata["surrogate"] = std::string(model.decomposition ? "decomposition" : "eigenvalues-of-a");
  return report;
}

double estimate_K(const CoefficientModel& model, std::span<const StatePoint> samples) {
  double k = 0.0;
  for (const auto& z : samples) {
    require_dims(model, z);
    k = std::max(k, model.b(z).cwiseAbs().maxCoeff());
    k = std::max(k, model.sigma(z).cwiseAbs().maxCoeff());
  }
  return k;
}

DiagnosticReport check_singular_bounds(const CoefficientModel& model, std::span<const StatePoint> samples, double q,
                                       std::span<const double> s_grid) {
  if (!model.singular) {
    throw InvalidArgumentError("check_singular_bounds: model has no singular drift");
  }
  double sup_f = 0.0;
  double sup_sigma_inv_f = 0.0;
  for (const auto& z : samples) {
    require_dims(model, z);
    const Matrix f = model.singular->f(z);
    sup_f = std::max(sup_f, f.norm());
    if (z.interior()) {
      const Matrix sigma = model.sigma(z);
      Eigen::PartialPivLU<Matrix> lu(sigma);
      if (lu.rcond() < kMinReciprocalCondition) {
        throw SingularMatrixError("check_singular_bounds: sigma is singular at an interior sample");
      }
      sup_sigma_inv_f = std::max(sup_sigma_inv_f, Matrix(lu.solve(f)).norm());
    }
  }
  double sup_h = 0.0;
  for (int i = 0; i < model.dim(); ++i) {
    for (int j = 0; j < model.n; ++j) {
      for (double s : s_grid) {
        sup_h = std::max(sup_h, std::abs(model.singular->h(i, j, s)) * std::pow(s, q));
      }
    }
  }
  DiagnosticReport report;
  report.name = "singular-bounds";
  report.estimate = std::max({sup_f, sup_sigma_inv_f, sup_h});
  report.bound = model.declared.K0;
  // Equality is allowed, up to round-off in h(s) s^q.
  report.verdict = verdict_from_bool(report.estimate <= report.bound * (1.0 + 1e-12));
  report.metadata["sup_f"] = sup_f;
  report.metadata["sup_sigma_inv_f"] = sup_sigma_inv_f;
  report.metadata["sup_h_s_pow_q"] = sup_h;
  report.metadata["q"] = q;
  return report;
}

Vector solve_sigma(const Matrix& sigma, const Vector& rhs) {
  Eigen::PartialPivLU<Matrix> lu(sigma);
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw SingularMatrixError("sigma is numerically singular (rcond " + std::to_string(lu.rcond()) + ")");
  }
  return lu.solve(rhs);
}

Matrix invert_sigma(const CoefficientModel& model, const StatePoint& z) {
  require_dims(model, z);
  if (!z.interior()) {
    throw InvalidArgumentError("invert_sigma: z must lie in the open orthant");
  }
  const Matrix sigma = model.sigma(z);
  Eigen::PartialPivLU<Matrix> lu(sigma);
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw SingularMatrixError("invert_sigma: sigma is numerically singular");
  }
  Matrix inverse = lu.inverse();
  const double residual = (sigma * inverse - Matrix::Identity(sigma.rows(), sigma.cols())).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    throw SingularMatrixError("invert_sigma: inversion residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  return inverse;
}

double apply_generator(const CoefficientModel& model, const TestFunction& u, const StatePoint& z) {
  require_dims(model, z);
  const int n = model.n;
  const int m = model.m;
  const Matrix a = assemble_a(model, z);
  const Matrix h = u.hessian(z);
  const Vector g = u.gradient(z);
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out += std::sqrt(z.x(i) * z.x(j)) * a(i, j) * h(i, j);
    }
    for (int l = 0; l < m; ++l) {
      out += std::sqrt(z.x(i)) * (a(i, n + l) + a(n + l, i)) * h(i, n + l);
    }
  }
  for (int l = 0; l < m; ++l) {
    for (int k = 0; k < m; ++k) {
      out += a(n + l, n + k) * h(n + l, n + k);
    }
  }
  out += model.drift(z).dot(g);
  return out;
}

double apply_generator_structured(const CoefficientModel& model, const TestFunction& u, const StatePoint& z) {
  if (!model.decomposition) {
    throw InvalidArgumentError("apply_generator_structured: model has no decomposition");
  }
  require_dims(model, z);
  const auto& dec = *model.decomposition;
  const int n = model.n;
  const int m = model.m;
  const Matrix h = u.hessian(z);
  const Vector g = u.gradient(z);
  const Vector alpha = dec.alpha_diag(z);
  const Matrix at = dec.alpha_tilde(z);
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    out += z.x(i) * alpha(i) * h(i, i);
    for (int j = 0; j < n; ++j) {
      out += z.x(i) * z.x(j) * at(i, j) * h(i, j);
    }
  }
  if (m > 0) {
    const Matrix c = dec.c(z);
    const Matrix af = dec.a_free(z);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < m; ++l) {
        out += z.x(i) * c(i, l) * h(i, n + l);
      }
    }
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) {
        out += af(k, l) * h(n + k, n + l);
      }
    }
  }
  out += model.drift(z).dot(g);
  return out;
}

std::vector<StatePoint> boundary_samples(int n, int m, int count, double R) {
  if (n < 1) {
    throw InvalidArgumentError("boundary_samples: model has no orthant coordinates");
  }
  if (n + m > static_cast<int>(std::size(kPrimes))) {
    throw DimensionError("boundary_samples: dimension too large");
  }
  std::vector<StatePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int face = k % n;
    StatePoint z = StatePoint::zero(n, m);
    const auto index = static_cast<std::uint64_t>(k / n + 1);
    int dimension = 0;
    for (int i = 0; i < n; ++i) {
      if (i != face) {
        z.x(i) = R * radical_inverse(index, kPrimes[dimension++]);
      }
    }
    for (int l = 0; l < m; ++l) {
      z.y(l) = -R + 2.0 * R * radical_inverse(index, kPrimes[dimension++]);
    }
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<StatePoint> box_samples(int n, int m, int count, double R, double lo) {
  if (n + m > static_cast<int>(std::size(kPrimes))) {
    throw DimensionError("box_samples: dimension too large");
  }
  std::vector<StatePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    StatePoint z = StatePoint::zero(n, m);
    const auto index = static_cast<std::uint64_t>(k + 1);
    for (int i = 0; i < n; ++i) {
      z.x(i) = lo + (R - lo) * radical_inverse(index, kPrimes[i]);
    }
    for (int l = 0; l < m; ++l) {
      z.y(l) = -R + 2.0 * R * radical_inverse(index, kPrimes[n + l]);
    }
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw InvalidArgumentError("log_spaced: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = lo * std::exp(step * k);
  }
  return out;
}

}  // namespace kimura
