#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <kimura/engine.hpp>
#include <kimura/model.hpp>
#include <kimura/report.hpp>

namespace kimura {

enum class WeightDirection { kStandardToSingular, kSingularToStandard };

const char* to_string(WeightDirection direction);

/// Paths whose |log weight| exceeds this are excluded from estimators.
inline constexpr double kLogWeightLimit = 700.0;

/// theta(z) = sigma(z)^-1 xi(z), with h evaluated at max(x_j, floor) and sigma, f at z itself.
Vector theta_eval(const CoefficientModel& model, const StatePoint& z, double epsilon_floor);

/// A PathBundle plus cumulative log Radon-Nikodym weights at every recorded time.
struct WeightedPathBundle {
  PathBundle base;
  WeightDirection direction = WeightDirection::kStandardToSingular;
  std::vector<double> log_weights;  // [path][recorded time]
  std::vector<std::uint8_t> excluded;

  std::size_t n_paths() const { return excluded.size(); }
  std::size_t excluded_count() const;
  double excluded_fraction() const;
  double log_weight(std::size_t path, std::size_t record) const {
    return log_weights[path * base.n_recorded() + record];
  }
  /// Final log weights of the retained paths.
  std::vector<double> terminal_log_weights() const;
};

/// Accumulates log M(t_k) along stored increments:
///   standard-to-singular: sum theta(Z_j) . dW_j - |theta(Z_j)|^2 dt / 2,
///   singular-to-standard: sum -theta(Z_j) . dW_j - |theta(Z_j)|^2 dt / 2.
WeightedPathBundle accumulate_log_weight(const PathBundle& bundle, const CoefficientModel& model,
                                         WeightDirection direction, int workers = 1);

/// Simulates the source equation of `direction` and accumulates the weights on the fly,
/// without retaining increments (record_stride of cfg is honoured).
WeightedPathBundle simulate_weighted(const CoefficientModel& model, const SimConfig& cfg, const StatePoint& z0,
                                     WeightDirection direction, std::size_t first_path, std::size_t count);

void append_weighted(WeightedPathBundle& into, const WeightedPathBundle& chunk);

/// Re-expresses the stored increments in the Brownian motion of the other measure:
/// dW - theta(Z) dt for a standard bundle, dW + theta(Z) dt for a singular one. The
/// returned bundle is labelled with the other equation kind.
PathBundle shift_increments(const PathBundle& bundle, const CoefficientModel& model);

enum class Normalization { kRaw, kSelfNormalized };

struct WeightedEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double mean_weight = 0.0;
  double mean_weight_stderr = 0.0;
  double ess = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// Weighted mean of values under exp(log_weights); entries flagged in `excluded` are dropped.
WeightedEstimate reweighted_expectation(std::span<const double> log_weights, std::span<const double> values,
                                        Normalization normalization, std::span<const std::uint8_t> excluded = {});

/// Same for a path functional of the bundle, using the terminal weights.
WeightedEstimate reweighted_expectation(const WeightedPathBundle& wbundle,
                                        const std::function<double(const PathBundle&, std::size_t)>& functional,
                                        Normalization normalization);

/// (sum w)^2 / sum w^2.
double ess(std::span<const double> weights);

/// ESS computed stably from log weights.
double ess_from_log_weights(std::span<const double> log_weights);

/// Default Lambda: K0 times the sup of |sigma^-1 f| over interior samples.
double default_lambda(const CoefficientModel& model, std::span<const StatePoint> samples);

/// Checks |theta(z)| <= Lambda sum_i x_i^-q at interior samples; the estimate is the
/// worst ratio and violations are counted in the metadata.
DiagnosticReport check_theta_bound(const CoefficientModel& model, std::span<const StatePoint> samples, double lambda,
                                   double q, double epsilon_floor);

}  // namespace kimura
