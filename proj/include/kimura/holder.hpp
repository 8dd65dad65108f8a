#pragma once

#include <functional>
#include <string>
#include <vector>

#include <kimura/geometry.hpp>
#include <kimura/model.hpp>
#include <kimura/report.hpp>

namespace kimura {

/// Values of u on a finite set of space-time points, with optional derivative oracles
/// for the 2 + alpha norm.
struct SampledFunction {
  std::vector<SpaceTimePoint> points;
  std::vector<double> values;
  std::function<double(const SpaceTimePoint&)> time_derivative;
  std::function<Vector(const SpaceTimePoint&)> gradient;
  std::function<Matrix(const SpaceTimePoint&)> hessian;

  /// Samples u at the given points.
  static SampledFunction from(const std::function<double(const SpaceTimePoint&)>& u,
                              std::vector<SpaceTimePoint> points);
};

/// max over distinct pairs of |u(p0) - u(p1)| / rho(p0, p1)^alpha.
double holder_seminorm(const SampledFunction& fs, double alpha);

/// sup |u| + holder_seminorm.
double holder_norm(const SampledFunction& fs, double alpha);

struct NormTerm {
  std::string name;
  double value = 0.0;
};

struct HolderBreakdown {
  double total = 0.0;
  std::vector<NormTerm> terms;
};

/// The C^{2+alpha}_WF norm on the closure of M_region: the C^{1,alpha} terms (u and its
/// first derivatives), the weighted second derivatives and u_t, each through holder_norm.
HolderBreakdown holder_2alpha_norm(const SampledFunction& fs, double alpha, const RegionIndex& region);

struct HolderGridSpec {
  int levels = 4;              // refinement levels; level L reaches 10^-(L+1) from 0 and 1
  int points_per_decade = 3;
  double box = 10.0;           // orthant coordinates outside I live in [1, box]
  double free_box = 2.0;       // free coordinates live in [-free_box, free_box]
  int free_points = 5;
  double blowup_factor = 2.0;  // flag when the last refinement grows an estimate by more than this
  std::size_t max_points = 3000;
};

struct HolderNormRow {
  std::string region;
  std::string term;
  int level = 0;
  double estimate = 0.0;
};

struct HolderValidation {
  DiagnosticReport report;
  std::vector<HolderNormRow> rows;
};

/// Empirical C^alpha_WF seminorms of the coefficient combinations required on each region,
/// on nested grids refined toward x_i = 0 and x_i = 1, with a blow-up flag per term.
HolderValidation validate_coefficient_holder(const CoefficientModel& model, double alpha,
                                             const HolderGridSpec& spec = {});

/// The level-L grid of the closure of M_region used by validate_coefficient_holder.
std::vector<StatePoint> region_grid(int n, int m, const RegionIndex& region, int level, const HolderGridSpec& spec);

}  // namespace kimura
