#include <kimura/engine.hpp>

#include <algorithm>
#include <cmath>
#include <limits>


namespace kimura {

const char* to_string(ClampMode mode) {
  return mode == ClampMode::kPostStepClamp ? "post-step-clamp" : "record-only";
}

const char* to_string(SdeKind kind) { return kind == SdeKind::kStandard ? "standard" : "singular"; }

int SimConfig::steps() const {
  if (!(horizon_T > 0.0) || !(dt > 0.0)) {
    throw InvalidArgumentError("horizon_T and dt must be positive");
  }
  return std::max(1, static_cast<int>(std::ceil(horizon_T / dt - 1e-9)));
}

void SimConfig::validate() const {
  if (!(horizon_T > 0.0) || !(dt > 0.0) || !(dt <= horizon_T)) {
    throw InvalidArgumentError("SimConfig requires 0 < dt <= horizon_T");
  }
  if (n_paths < 1) {
    throw InvalidArgumentError("SimConfig requires n_paths >= 1");
  }
  if (!(epsilon_floor >= 0.0)) {
    throw InvalidArgumentError("SimConfig requires epsilon_floor >= 0");
  }
  if (record_stride < 1) {
    throw InvalidArgumentError("SimConfig requires record_stride >= 1");
  }
}

Vector xi_eval(const CoefficientModel& model, const StatePoint& z, double epsilon_floor) {
  const int n = model.n;
  const int d = model.dim();
  Vector xi = Vector::Zero(d);
  if (!model.singular) {
    return xi;
  }
  const Matrix f = model.singular->f(z);
  if (f.rows() != d || f.cols() != n) {
    throw DimensionError("f(z) must be (n + m) x n");
  }
  for (int j = 0; j < n; ++j) {
    const double s = std::max(z.x(j), epsilon_floor);
    for (int i = 0; i < d; ++i) {
      if (f(i, j) != 0.0) {
        xi(i) += f(i, j) * model.singular->h(i, j, s);
      }
    }
  }
  return xi;
}

Vector singular_drift(const CoefficientModel& model, const StatePoint& z, double epsilon_floor) {
  Vector xi = xi_eval(model, z, epsilon_floor);
  for (int i = 0; i < model.n; ++i) {
    xi(i) *= std::sqrt(std::max(z.x(i), 0.0));
  }
  return xi;
}

namespace detail {

void euler_raw(const CoefficientModel& model, SdeKind kind, double epsilon_floor, double dt, const StatePoint& z,
               const Vector& running_max, const Vector& dW, Vector& raw) {
  const StatePoint zp = project(z);
  Vector drift(model.dim());
  if (model.history_drift) {
    drift.head(model.n) = model.history_drift(zp, running_max);
    if (model.m > 0) {
      drift.tail(model.m) = model.e(zp);
    }
  } else {
    drift = model.drift(zp);
  }
  if (kind == SdeKind::kSingular) {
    drift += singular_drift(model, zp, epsilon_floor);
  }
  raw = z.stacked() + drift * dt + assemble_varsigma(model, zp) * dW;
}

}  // namespace detail

namespace {

StepResult finish_step(const CoefficientModel& model, const Vector& raw, ClampMode mode) {
  StepResult out;
  out.pre_clamp.coords = raw;
  out.pre_clamp.n = model.n;
  out.next = StatePoint::from_stacked(raw, model.n);
  if (mode == ClampMode::kPostStepClamp) {
    out.next = project(out.next);
  }
  return out;
}

void check_dims(const CoefficientModel& model, const StatePoint& z, const Vector& dW) {
  if (z.n() != model.n || z.m() != model.m || dW.size() != model.dim()) {
    throw DimensionError("state or increment does not match model (n, m)");
  }
}

}  // namespace

StepResult step_standard(const CoefficientModel& model, const StatePoint& z, double dt, const Vector& dW,
                         ClampMode mode) {
  check_dims(model, z, dW);
  Vector raw;
  detail::euler_raw(model, SdeKind::kStandard, 0.0, dt, z, z.x, dW, raw);
  return finish_step(model, raw, mode);
}

StepResult step_singular(const CoefficientModel& model, const StatePoint& z, double dt, const Vector& dW,
                         double epsilon_floor, ClampMode mode) {
  check_dims(model, z, dW);
  Vector raw;
  detail::euler_raw(model, SdeKind::kSingular, epsilon_floor, dt, z, z.x, dW, raw);
  return finish_step(model, raw, mode);
}

StatePoint PathBundle::state(std::size_t path, std::size_t record) const {
  const int d = dim();
  const double* p = states.data() + (path * n_recorded() + record) * static_cast<std::size_t>(d);
  StatePoint z = StatePoint::zero(n, m);
  for (int i = 0; i < n; ++i) {
    z.x(i) = p[i];
  }
  for (int l = 0; l < m; ++l) {
    z.y(l) = p[n + l];
  }
  return z;
}

Vector PathBundle::increment(std::size_t path, int step) const {
  if (!has_increments()) {
    throw InvalidArgumentError("bundle does not retain increments");
  }
  const int d = dim();
  const double* p = increments.data() + (path * static_cast<std::size_t>(steps) + step) * d;
  return Eigen::Map<const Eigen::VectorXd>(p, d);
}

std::vector<double> PathBundle::terminal_values(int coord) const {
  std::vector<double> out(n_paths());
  const std::size_t last = n_recorded() - 1;
  for (std::size_t p = 0; p < n_paths(); ++p) {
    out[p] = states[(p * n_recorded() + last) * dim() + coord];
  }
  return out;
}

namespace detail {

PathBundle prepare_bundle(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0, SdeKind kind,
                          std::size_t first_path, std::size_t count) {
  cfg.validate();
  if (z0.n() != model.n || z0.m() != model.m) {
    throw DimensionError("initial state does not match model (n, m)");
  }
  if (!z0.canonical()) {
    throw InvalidArgumentError("initial state must satisfy x >= 0");
  }
  if (kind == SdeKind::kSingular && !model.singular) {
    throw InvalidArgumentError("singular simulation requires a model with f and h");
  }
  const int steps = cfg.steps();
  const int d = model.dim();
  PathBundle b;
  b.n = model.n;
  b.m = model.m;
  b.kind = kind;
  b.clamp_mode = cfg.clamp_mode;
  b.master_seed = cfg.master_seed;
  b.first_path = first_path;
  b.dt = cfg.step_size();
  b.steps = steps;
  b.record_stride = cfg.record_stride;
  b.epsilon_floor = cfg.epsilon_floor;
  for (int k = 0; k <= steps; ++k) {
    if (k % cfg.record_stride == 0 || k == steps) {
      b.recorded_steps.push_back(k);
      b.times.push_back(k * b.dt);
    }
  }
  b.states.assign(count * b.times.size() * d, 0.0);
  if (cfg.retain_increments) {
    b.increments.assign(count * static_cast<std::size_t>(steps) * d, 0.0);
  }
  b.negativity.assign(count, 0.0);
  b.boundary_hits.assign(count, 0);
  return b;
}

}  // namespace detail

PathBundle simulate(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0, SdeKind kind,
                    std::size_t first_path, std::size_t count) {
  return simulate_observed(model, cfg, z0, kind, first_path, count,
                           [](std::size_t, int, double, const StatePoint&, const Vector&, const Vector&,
                              const StatePoint&) {});
}

PathBundle simulate_standard(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0) {
  return simulate(model, cfg, z0, SdeKind::kStandard, 0, cfg.n_paths);
}

PathBundle simulate_singular(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0) {
  if (!model.singular) {
    throw InvalidArgumentError("simulate_singular requires a model with f and h");
  }
  const double q0 = compute_q0(model.declared.b0, model.declared.K, model.n, model.m);
  if (!(model.declared.q < q0)) {
    throw InfeasibleParameterError("declared q = " + std::to_string(model.declared.q) + " is not below q0 = " +
                                   std::to_string(q0));
  }
  return simulate(model, cfg, z0, SdeKind::kSingular, 0, cfg.n_paths);
}

void append_bundle(PathBundle& into, const PathBundle& chunk) {
  if (into.n_paths() == 0 && into.times.empty()) {
    into = chunk;
    return;
  }
  if (chunk.n != into.n || chunk.m != into.m || chunk.steps != into.steps || chunk.times != into.times ||
      chunk.has_increments() != into.has_increments() || chunk.first_path != into.first_path + into.n_paths()) {
    throw InvalidArgumentError("append_bundle: chunk is not a continuation of the bundle");
  }
  into.states.insert(into.states.end(), chunk.states.begin(), chunk.states.end());
  into.increments.insert(into.increments.end(), chunk.increments.begin(), chunk.increments.end());
  into.negativity.insert(into.negativity.end(), chunk.negativity.begin(), chunk.negativity.end());
  into.boundary_hits.insert(into.boundary_hits.end(), chunk.boundary_hits.begin(), chunk.boundary_hits.end());
}

BrownianReconstruction reconstruct_brownian(const CoefficientModel& model, const PathBundle& bundle) {
  if (!bundle.has_increments() || bundle.record_stride != 1) {
    throw InvalidArgumentError("reconstruct_brownian needs retained increments and record_stride 1");
  }
  if (bundle.n != model.n || bundle.m != model.m) {
    throw DimensionError("bundle does not match model (n, m)");
  }
  if (bundle.kind != SdeKind::kStandard) {
    throw InvalidArgumentError("reconstruct_brownian applies to standard-equation bundles");
  }
  const int d = model.dim();
  const std::size_t steps = static_cast<std::size_t>(bundle.steps);
  BrownianReconstruction out;
  out.increments.assign(bundle.n_paths() * steps * d, 0.0);
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    StatePoint z = bundle.state(p, 0);
    Vector running_max = z.x;
    for (std::size_t k = 0; k < steps; ++k) {
      const StatePoint next = bundle.state(p, k + 1);
      if (model.n > 0 && z.x.minCoeff() <= 0.0) {
        ++out.boundary_steps;
      } else {
        const StatePoint zp = project(z);
        Vector drift(d);
        if (model.history_drift) {
          drift.head(model.n) = model.history_drift(zp, running_max);
          if (model.m > 0) {
            drift.tail(model.m) = model.e(zp);
          }
        } else {
          drift = model.drift(zp);
        }
        const Matrix varsigma = assemble_varsigma(model, zp);
        Eigen::PartialPivLU<Matrix> lu(varsigma);
        if (!(lu.rcond() >= 1e-12)) {
          throw SimulationError("varsigma is singular at an interior step", static_cast<long long>(bundle.first_path + p),
                                static_cast<long long>(k));
        }
        const Vector dz = next.stacked() - z.stacked();
        const Vector dW = lu.solve(Vector(dz - drift * bundle.dt));
        Eigen::Map<Eigen::VectorXd>(out.increments.data() + (p * steps + k) * d, d) = dW;
        const bool clamped =
            bundle.clamp_mode == ClampMode::kPostStepClamp && model.n > 0 && next.x.minCoeff() <= 0.0;
        if (clamped) {
          ++out.clamped_steps;
        } else {
          ++out.interior_steps;
          const double dev = (dW - bundle.increment(p, static_cast<int>(k))).cwiseAbs().maxCoeff();
          out.max_deviation = std::max(out.max_deviation, dev);
        }
      }
      running_max = running_max.cwiseMax(next.x);
      z = next;
    }
  }
  return out;
}

}  // namespace kimura
