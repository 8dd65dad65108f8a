#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include <kimura/errors.hpp>
#include <kimura/geometry.hpp>
#include <kimura/model.hpp>
#include <kimura/parallel.hpp>
#include <kimura/rng.hpp>

namespace kimura {

enum class ClampMode { kPostStepClamp, kRecordOnly };
enum class SdeKind { kStandard, kSingular };

const char* to_string(ClampMode mode);
const char* to_string(SdeKind kind);

struct SimConfig {
  double horizon_T = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t master_seed = 0;
  ClampMode clamp_mode = ClampMode::kPostStepClamp;
  double epsilon_floor = 1e-8;  // floor for the arguments of h only
  int record_stride = 1;        // the final time is always recorded
  bool retain_increments = false;
  int workers = 0;  // 0 = hardware concurrency

  /// Number of steps N = ceil(T / dt); the grid is uniform with step T / N.
  int steps() const;
  double step_size() const { return horizon_T / steps(); }
  void validate() const;
};

/// Result of one Euler step: the canonical next state and the raw pre-clamp point.
struct StepResult {
  StatePoint next;
  RawPoint pre_clamp;
};

/// xi_i(z) = sum_j f_ij(z) h_ij(max(x_j, floor)), i = 0..n+m-1. Zero for standard models.
Vector xi_eval(const CoefficientModel& model, const StatePoint& z, double epsilon_floor);

/// Extra drift of the singular equation: sqrt(x_i) xi_i on orthant rows, xi on free rows.
Vector singular_drift(const CoefficientModel& model, const StatePoint& z, double epsilon_floor);

/// One Euler-Maruyama step of the standard equation with coefficients evaluated at project(z).
StepResult step_standard(const CoefficientModel& model, const StatePoint& z, double dt, const Vector& dW,
                         ClampMode mode = ClampMode::kPostStepClamp);

/// One step of the singular equation.
StepResult step_singular(const CoefficientModel& model, const StatePoint& z, double dt, const Vector& dW,
                         double epsilon_floor, ClampMode mode = ClampMode::kPostStepClamp);

namespace detail {
// Computes the raw next point; running_max is only read by history-dependent models.
void euler_raw(const CoefficientModel& model, SdeKind kind, double epsilon_floor, double dt, const StatePoint& z,
               const Vector& running_max, const Vector& dW, Vector& raw);
}  // namespace detail

/// Simulates one path from z0 for `steps` steps of size dt starting at time t0, drawing
/// increments from stream `key`. visit(k, t_k, z_k, dW_k, raw_{k+1}, z_{k+1}) is called
/// after every step. Model failures are rethrown as SimulationError with `path_label`.
template <typename Visitor>
void run_path(const CoefficientModel& model, const SimConfig& cfg, SdeKind kind, const StatePoint& z0,
              std::uint64_t key, int steps, double dt, double t0, long long path_label, Visitor&& visit) {
  const int d = model.dim();
  const double sqrt_dt = std::sqrt(dt);
  StatePoint z = z0;
  StatePoint next = z0;
  Vector running_max = z0.x;
  Vector dW(d);
  Vector raw(d);
  for (int k = 0; k < steps; ++k) {
    try {
      brownian_increment(key, static_cast<std::uint64_t>(k), sqrt_dt, dW);
      detail::euler_raw(model, kind, cfg.epsilon_floor, dt, z, running_max, dW, raw);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(e.what(), path_label, k);
    }
    if (!raw.allFinite()) {
      throw SimulationError("non-finite state", path_label, k);
    }
    next.x = raw.head(model.n);
    next.y = raw.tail(model.m);
    if (cfg.clamp_mode == ClampMode::kPostStepClamp) {
      next.x = next.x.cwiseMax(0.0);
    }
    running_max = running_max.cwiseMax(next.x);
    visit(k, t0 + k * dt, z, dW, raw, next);
    z = next;
  }
}

/// Simulated discrete paths. States are stored path-major as
/// [path][recorded time][coordinate], increments as [path][step][coordinate].
struct PathBundle {
  int n = 0;
  int m = 0;
  SdeKind kind = SdeKind::kStandard;
  ClampMode clamp_mode = ClampMode::kPostStepClamp;
  std::uint64_t master_seed = 0;
  std::size_t first_path = 0;
  double dt = 0.0;
  int steps = 0;
  int record_stride = 1;
  double epsilon_floor = 0.0;
  std::vector<double> times;
  std::vector<int> recorded_steps;
  std::vector<double> states;
  std::vector<double> increments;
  std::vector<double> negativity;  // per path, max over steps of max_i(-x_i^pre, 0)
  std::vector<std::int64_t> boundary_hits;  // per path, steps ending with some x_i <= 0

  int dim() const { return n + m; }
  std::size_t n_paths() const { return negativity.size(); }
  std::size_t n_recorded() const { return times.size(); }
  bool has_increments() const { return !increments.empty(); }

  StatePoint state(std::size_t path, std::size_t record) const;
  StatePoint terminal(std::size_t path) const { return state(path, n_recorded() - 1); }
  Vector increment(std::size_t path, int step) const;

  /// Coordinate `coord` (stacked index) of every path at the final time.
  std::vector<double> terminal_values(int coord) const;
};

namespace detail {
// Validates the inputs and allocates a bundle for `count` paths.
PathBundle prepare_bundle(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0, SdeKind kind,
                          std::size_t first_path, std::size_t count);
}  // namespace detail

/// simulate() with an extra per-step hook observe(i, k, t_k, z_k, dW_k, raw_{k+1}, z_{k+1}),
/// where i is the index of the path within this chunk. Paths run in parallel, so the
/// observer must only touch per-path state.
template <typename Observer>
PathBundle simulate_observed(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0, SdeKind kind,
                             std::size_t first_path, std::size_t count, Observer&& observe) {
  PathBundle b = detail::prepare_bundle(model, cfg, z0, kind, first_path, count);
  const int d = model.dim();
  const std::size_t rec = b.times.size();
  const int steps = b.steps;
  const double dt = b.dt;
  parallel_for(count, cfg.workers, [&](std::size_t i) {
    const std::size_t path = first_path + i;
    double* states = b.states.data() + i * rec * d;
    double* incs = b.has_increments() ? b.increments.data() + i * static_cast<std::size_t>(steps) * d : nullptr;
    Eigen::Map<Eigen::VectorXd>(states, d) = z0.stacked();
    std::size_t next_record = 1;
    double negativity = 0.0;
    std::int64_t hits = 0;
    run_path(model, cfg, kind, z0, stream_key(cfg.master_seed, path), steps, dt, 0.0, static_cast<long long>(path),
             [&](int k, double t, const StatePoint& z, const Vector& dW, const Vector& raw, const StatePoint& next) {
               if (incs) {
                 Eigen::Map<Eigen::VectorXd>(incs + static_cast<std::size_t>(k) * d, d) = dW;
               }
               if (model.n > 0) {
                 negativity = std::max(negativity, -raw.head(model.n).minCoeff());
                 if (next.x.minCoeff() <= 0.0) {
                   ++hits;
                 }
               }
               if (next_record < rec && b.recorded_steps[next_record] == k + 1) {
                 double* out = states + next_record * d;
                 Eigen::Map<Eigen::VectorXd>(out, model.n) = next.x;
                 Eigen::Map<Eigen::VectorXd>(out + model.n, model.m) = next.y;
                 ++next_record;
               }
               observe(i, k, t, z, dW, raw, next);
             });
    b.negativity[i] = negativity;
    b.boundary_hits[i] = hits;
  });
  return b;
}

/// Simulates paths [first_path, first_path + count) of the run described by cfg; the
/// bundles of consecutive chunks concatenate to the single-call result.
PathBundle simulate(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0, SdeKind kind,
                    std::size_t first_path, std::size_t count);

PathBundle simulate_standard(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0);
PathBundle simulate_singular(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0);

/// Appends the paths of `chunk` to `into` (same run, consecutive path ranges).
void append_bundle(PathBundle& into, const PathBundle& chunk);

struct BrownianReconstruction {
  std::vector<double> increments;  // same layout as PathBundle::increments
  double max_deviation = 0.0;      // over interior, unclamped steps
  std::size_t interior_steps = 0;
  std::size_t boundary_steps = 0;  // started with some x_i <= 0; contribute exactly zero
  std::size_t clamped_steps = 0;   // started inside but ended clamped; excluded from the deviation
};

/// Recovers dW_k = varsigma(Z_k)^-1 (dZ_k - drift(Z_k) dt) on interior steps.
BrownianReconstruction reconstruct_brownian(const CoefficientModel& model, const PathBundle& bundle);

}  // namespace kimura
