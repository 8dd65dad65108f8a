#pragma once

#include <functional>
#include <random>

#include <kimura/model.hpp>

namespace kimura::testing {

inline StatePoint pt(std::initializer_list<double> x, std::initializer_list<double> y = {}) {
  Vector xv(static_cast<Eigen::Index>(x.size()));
  Vector yv(static_cast<Eigen::Index>(y.size()));
  int i = 0;
  for (double v : x) xv(i++) = v;
  i = 0;
  for (double v : y) yv(i++) = v;
  return StatePoint(xv, yv);
}

// Model with constant drift and dispersion; no decomposition.
inline CoefficientModel constant_model(const Vector& b, const Vector& e, const Matrix& sigma) {
  CoefficientModel model;
  model.name = "test-constant";
  model.n = static_cast<int>(b.size());
  model.m = static_cast<int>(e.size());
  model.b = [b](const StatePoint&) { return b; };
  model.e = [e](const StatePoint&) { return e; };
  model.sigma = [sigma](const StatePoint&) { return sigma; };
  return model;
}

inline CoefficientModel scalar_model(double b, double sigma) {
  return constant_model(Vector::Constant(1, b), Vector(0), Matrix::Constant(1, 1, sigma));
}

// Adds f = c and h(s) = s^-p to a one-dimensional model.
inline CoefficientModel with_power_drift(CoefficientModel model, double c, double p) {
  SingularDrift drift;
  drift.f = [c, n = model.n, d = model.dim()](const StatePoint&) { return Matrix(Matrix::Constant(d, n, c)); };
  drift.h = [p](int, int, double s) { return std::pow(s, -p); };
  model.singular = drift;
  return model;
}

inline Matrix random_matrix(std::mt19937_64& gen, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = u(gen);
  return out;
}

}  // namespace kimura::testing
