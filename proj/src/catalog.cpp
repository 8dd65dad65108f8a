#include <kimura/catalog.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include <kimura/errors.hpp>

namespace kimura {

namespace {

// Reads parameters with defaults and rejects anything left unread.
class ParamReader {
 public:
  ParamReader(std::string model, const ModelParams& params) : model_(std::move(model)), params_(params) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  bool has(const std::string& key) const { return params_.count(key) > 0; }

  void finish() const {
    for (const auto& [key, value] : params_) {
      if (!used_.count(key)) {
        throw InvalidArgumentError("model '" + model_ + "' has no parameter '" + key + "'");
      }
    }
  }

 private:
  std::string model_;
  const ModelParams& params_;
  std::set<std::string> used_;
};

Vector constant_vector(int size, double value) { return Vector::Constant(size, value); }

DecomposedDiffusion diagonal_decomposition(Vector alpha, Matrix a_free) {
  const int n = static_cast<int>(alpha.size());
  const int m = static_cast<int>(a_free.rows());
  DecomposedDiffusion d;
  d.alpha_diag = [alpha](const StatePoint&) { return alpha; };
  d.alpha_tilde = [n](const StatePoint&) { return Matrix(Matrix::Zero(n, n)); };
  d.c = [n, m](const StatePoint&) { return Matrix(Matrix::Zero(n, m)); };
  d.a_free = [a_free](const StatePoint&) { return a_free; };
  return d;
}

CoefficientModel const_wf_1d(ParamReader& p) {
  const double b = p.get("b", 1.0);
  const double s = p.get("sigma", 1.0);
  CoefficientModel model;
  model.name = "const-wf-1d";
  model.n = 1;
  model.m = 0;
  model.b = [b](const StatePoint&) { return constant_vector(1, b); };
  model.e = [](const StatePoint&) { return Vector(0); };
  model.sigma = [s](const StatePoint&) { return Matrix(Matrix::Constant(1, 1, s)); };
  model.decomposition = diagonal_decomposition(constant_vector(1, 0.5 * s * s), Matrix(0, 0));
  model.declared.b0 = b;
  model.declared.K = std::max(std::abs(b), std::abs(s));
  model.declared.q = p.get("q", 0.1);
  return model;
}

CoefficientModel cir_like(ParamReader& p) {
  const double kappa = p.get("kappa", 1.0);
  const double theta = p.get("theta", 1.0);
  const double s = p.get("sigma", 1.0);
  const double box = p.get("box", 10.0);
  CoefficientModel model;
  model.name = "cir-like";
  model.n = 1;
  model.m = 0;
  model.b = [kappa, theta](const StatePoint& z) { return constant_vector(1, kappa * (theta - z.x(0))); };
  model.e = [](const StatePoint&) { return Vector(0); };
  model.sigma = [s](const StatePoint&) { return Matrix(Matrix::Constant(1, 1, s)); };
  model.decomposition = diagonal_decomposition(constant_vector(1, 0.5 * s * s), Matrix(0, 0));
  model.declared.b0 = kappa * theta;
  // b is unbounded; K is declared on the validation box [0, box].
  model.declared.K = std::max({std::abs(kappa * theta), std::abs(kappa * (box - theta)), std::abs(s)});
  model.declared.q = p.get("q", 0.05);
  return model;
}

CoefficientModel wf_with_free_coord(ParamReader& p) {
  const double sy = p.get("sigma_y", 1.0);
  CoefficientModel model;
  model.name = "wf-with-free-coord";
  model.n = 1;
  model.m = 1;
  model.b = [](const StatePoint& z) { return constant_vector(1, 1.0 + 0.5 * std::cos(z.y(0))); };
  model.e = [](const StatePoint& z) { return constant_vector(1, -z.y(0)); };
  model.sigma = [sy](const StatePoint&) {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = sy;
    return s;
  };
  model.decomposition = diagonal_decomposition(constant_vector(1, 0.5), Matrix::Constant(1, 1, 0.5 * sy * sy));
  model.declared.b0 = 0.5;
  model.declared.K = std::max(1.5, std::abs(sy));
  model.declared.q = p.get("q", 0.05);
  return model;
}

CoefficientModel log_drift(ParamReader& p) {
  const double r0 = p.get("r0", 0.5);
  const double coupling = p.get("coupling", 0.5);
  const double q = p.get("q", 0.1);
  if (!(r0 > 0.0) || !(q > 0.0)) {
    throw InvalidArgumentError("log-drift requires r0 > 0 and q > 0");
  }
  CoefficientModel model;
  model.name = "log-drift";
  model.n = 1;
  model.m = 0;
  model.b = [](const StatePoint&) { return constant_vector(1, 1.0); };
  model.e = [](const StatePoint&) { return Vector(0); };
  model.sigma = [](const StatePoint&) { return Matrix(Matrix::Identity(1, 1)); };
  model.decomposition = diagonal_decomposition(constant_vector(1, 0.5), Matrix(0, 0));
  SingularDrift singular;
  singular.f = [coupling](const StatePoint&) { return Matrix(Matrix::Constant(1, 1, coupling)); };
  singular.h = [r0](int, int, double s) { return std::log(s) * smooth_cutoff(s, r0); };
  model.singular = singular;
  model.declared.b0 = 1.0;
  model.declared.K = 1.0;
  model.declared.q = q;
  // sup_s |ln s| s^q = 1 / (e q), attained at s = exp(-1/q) < r0 / 2 for the defaults
  model.declared.K0 = std::max(std::abs(coupling), 1.01 / (std::exp(1.0) * q));
  return model;
}

CoefficientModel power_singular(ParamReader& p) {
  const double q = p.get("q", 0.1);
  const double exponent = p.get("exponent", q);
  CoefficientModel model;
  model.name = "power-singular";
  model.n = 1;
  model.m = 0;
  model.b = [](const StatePoint&) { return constant_vector(1, 1.0); };
  model.e = [](const StatePoint&) { return Vector(0); };
  model.sigma = [](const StatePoint&) { return Matrix(Matrix::Identity(1, 1)); };
  model.decomposition = diagonal_decomposition(constant_vector(1, 0.5), Matrix(0, 0));
  SingularDrift singular;
  singular.f = [](const StatePoint&) { return Matrix(Matrix::Ones(1, 1)); };
  singular.h = [exponent](int, int, double s) { return std::pow(s, -exponent); };
  model.singular = singular;
  model.declared.q = q;
  model.declared.K0 = 1.0;
  return model;
}

CoefficientModel negative_drift(ParamReader& p) {
  const double b = p.get("b", -1.0);
  CoefficientModel model = const_wf_1d(p);
  model.name = "negative-drift";
  model.b = [b](const StatePoint&) { return constant_vector(1, b); };
  model.declared.b0 = 1.0;  // deliberately false declaration
  model.declared.K = std::max(1.0, std::abs(b));
  return model;
}

CoefficientModel running_max(ParamReader& p) {
  const double beta = p.get("beta", 4.0);
  CoefficientModel model = const_wf_1d(p);
  model.name = "running-max";
  // Drift pulls x back up toward its running maximum; the restarted copy
  // forgets the maximum and so does not have the same law.
  model.b = [](const StatePoint&) { return constant_vector(1, 1.0); };
  model.history_drift = [beta](const StatePoint& z, const Vector& running_max_x) {
    return Vector(Vector::Constant(1, 1.0) + beta * (running_max_x - z.x.cwiseMax(0.0)));
  };
  return model;
}

CoefficientModel indefinite_cross(ParamReader& p) {
  const double strength = p.get("strength", 3.0);
  const double cap = p.get("cap", 0.3);
  if (!(strength * cap < 1.0)) {
    throw InvalidArgumentError("indefinite-cross needs strength * cap < 1 so that a stays positive definite");
  }
  CoefficientModel model;
  model.name = "indefinite-cross";
  model.n = 2;
  model.m = 0;
  auto tilde = [strength, cap](const StatePoint& z) {
    const double r = std::sqrt(std::max(z.x(0), 0.0) * std::max(z.x(1), 0.0));
    return r <= cap ? strength : strength * cap / r;
  };
  model.b = [](const StatePoint&) { return constant_vector(2, 1.0); };
  model.e = [](const StatePoint&) { return Vector(0); };
  model.sigma = [tilde](const StatePoint& z) {
    const double off = tilde(z) * std::sqrt(std::max(z.x(0), 0.0) * std::max(z.x(1), 0.0));
    Matrix two_a(2, 2);
    two_a << 2.0, 2.0 * off, 2.0 * off, 2.0;
    return Matrix(two_a.llt().matrixL());
  };
  DecomposedDiffusion d;
  d.alpha_diag = [](const StatePoint&) { return constant_vector(2, 1.0); };
  d.alpha_tilde = [tilde](const StatePoint& z) {
    Matrix t = Matrix::Zero(2, 2);
    t(0, 1) = t(1, 0) = tilde(z);
    return t;
  };
  d.c = [](const StatePoint&) { return Matrix(2, 0); };
  d.a_free = [](const StatePoint&) { return Matrix(0, 0); };
  model.decomposition = d;
  model.declared.b0 = 1.0;
  model.declared.K = 2.0;
  model.declared.q = p.get("q", 0.05);
  return model;
}

CoefficientModel holder_rough(ParamReader& p) {
  const double exponent = p.get("exponent", 0.1);
  CoefficientModel model = const_wf_1d(p);
  model.name = "holder-rough";
  model.b = [exponent](const StatePoint& z) { return constant_vector(1, std::pow(std::max(z.x(0), 0.0), exponent)); };
  return model;
}

CoefficientModel custom(ParamReader& p) {
  const int n = static_cast<int>(p.get("n", 1));
  const int m = static_cast<int>(p.get("m", 0));
  if (n < 0 || m < 0 || n + m < 1 || n + m > kMaxDim) {
    throw DimensionError("custom model needs n, m >= 0 and 1 <= n + m <= " + std::to_string(kMaxDim));
  }
  const int d = n + m;
  Vector b(n);
  Vector e(m);
  Matrix s(d, d);
  for (int i = 0; i < n; ++i) {
    b(i) = p.get("b_" + std::to_string(i + 1), 1.0);
  }
  for (int l = 0; l < m; ++l) {
    e(l) = p.get("e_" + std::to_string(l + 1), 0.0);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      s(i, j) = p.get("sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), i == j ? 1.0 : 0.0);
    }
  }
  CoefficientModel model;
  model.name = "custom";
  model.n = n;
  model.m = m;
  model.b = [b](const StatePoint&) { return b; };
  model.e = [e](const StatePoint&) { return e; };
  model.sigma = [s](const StatePoint&) { return s; };
  const Matrix a = 0.5 * s * s.transpose();
  // A constant a only admits the decomposition when the mixed blocks vanish.
  Matrix x_block = a.topLeftCorner(n, n);
  x_block.diagonal().setZero();
  const bool decomposable = x_block.cwiseAbs().maxCoeff() == 0.0 &&
                            (m == 0 || a.topRightCorner(n, m).cwiseAbs().maxCoeff() == 0.0);
  if (n == 0 || decomposable) {
    model.decomposition = diagonal_decomposition(a.diagonal().head(n), a.bottomRightCorner(m, m));
  }
  model.declared.b0 = p.get("b0", n > 0 ? b.minCoeff() : 1.0);
  model.declared.K = p.get("K", std::max(n > 0 ? b.cwiseAbs().maxCoeff() : 0.0, s.cwiseAbs().maxCoeff()));
  model.declared.q = p.get("q", 0.05);
  return model;
}

}  // namespace

double smooth_cutoff(double s, double r0) {
  auto psi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double up = psi(r0 - s);
  const double down = psi(s - 0.5 * r0);
  return up / (up + down);
}

std::vector<std::string> catalog_names() {
  return {"const-wf-1d",    "cir-like",    "wf-with-free-coord", "log-drift",    "power-singular",
          "negative-drift", "running-max", "indefinite-cross",   "holder-rough", "custom"};
}

CoefficientModel make_model(const std::string& name, const ModelParams& params) {
  ParamReader reader(name, params);
  CoefficientModel model;
  if (name == "const-wf-1d") {
    model = const_wf_1d(reader);
  } else if (name == "cir-like") {
    model = cir_like(reader);
  } else if (name == "wf-with-free-coord") {
    model = wf_with_free_coord(reader);
  } else if (name == "log-drift") {
    model = log_drift(reader);
  } else if (name == "power-singular") {
    model = power_singular(reader);
  } else if (name == "negative-drift") {
    model = negative_drift(reader);
  } else if (name == "running-max") {
    model = running_max(reader);
  } else if (name == "indefinite-cross") {
    model = indefinite_cross(reader);
  } else if (name == "holder-rough") {
    model = holder_rough(reader);
  } else if (name == "custom") {
    model = custom(reader);
  } else {
    throw InvalidArgumentError("unknown model '" + name + "'");
  }
  reader.finish();
  return model;
}

}  // namespace kimura
