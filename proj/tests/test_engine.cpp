#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include <kimura/catalog.hpp>
#include <kimura/diagnostics.hpp>
#include <kimura/engine.hpp>
#include <kimura/errors.hpp>
#include <kimura/rng.hpp>

#include "support.hpp"

using namespace kimura;
using kimura::testing::pt;
using kimura::testing::scalar_model;

namespace {

SimConfig small_config(std::size_t paths = 64, double T = 0.5, double dt = 1e-2) {
  SimConfig cfg;
  cfg.horizon_T = T;
  cfg.dt = dt;
  cfg.n_paths = paths;
  cfg.master_seed = 42;
  cfg.workers = 1;
  return cfg;
}

void expect_same_bundle(const PathBundle& a, const PathBundle& b) {
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_EQ(a.negativity, b.negativity);
  EXPECT_EQ(a.boundary_hits, b.boundary_hits);
}

}  // namespace

TEST(Step, DeterministicEuler) {
  const CoefficientModel model = scalar_model(1.0, 0.0);
  const StepResult r = step_standard(model, pt({0.0}), 0.1, Vector::Zero(1));
  EXPECT_DOUBLE_EQ(r.next.x(0), 0.1);
}

TEST(Step, ZeroCoefficientsAndNoiseKeepTheState) {
  const auto model = kimura::testing::constant_model(Vector::Zero(2), Vector::Zero(1), Matrix::Identity(3, 3));
  const StatePoint z = pt({0.3, 2.0}, {-1.0});
  EXPECT_EQ(step_standard(model, z, 0.01, Vector::Zero(3)).next, z);
}

TEST(Step, ClampRecordsPreClampPoint) {
  const CoefficientModel model = scalar_model(-1.0, 0.0);
  const StepResult clamped = step_standard(model, pt({0.05}), 0.1, Vector::Zero(1));
  EXPECT_EQ(clamped.next.x(0), 0.0);
  EXPECT_NEAR(clamped.pre_clamp.coords(0), -0.05, 1e-15);
  const StepResult raw = step_standard(model, pt({0.05}), 0.1, Vector::Zero(1), ClampMode::kRecordOnly);
  EXPECT_NEAR(raw.next.x(0), -0.05, 1e-15);
}

TEST(Step, SingularDriftUsesSqrtPrefactorAndFlooredH) {
  CoefficientModel model = kimura::testing::with_power_drift(scalar_model(0.0, 0.0), 1.0, 0.1);
  const StepResult r = step_singular(model, pt({4.0}), 0.1, Vector::Zero(1), 1e-8);
  EXPECT_NEAR(r.next.x(0), 4.0 + 0.1 * 2.0 * std::pow(4.0, -0.1), 1e-14);
  // At the boundary the prefactor sqrt(0) kills the floored h.
  EXPECT_EQ(step_singular(model, pt({0.0}), 0.1, Vector::Zero(1), 1e-8).next.x(0), 0.0);
}

TEST(Simulate, NoiselessPathIsTheEulerPolygon) {
  CoefficientModel model = make_model("wf-with-free-coord");
  model.sigma = [](const StatePoint&) { return Matrix(Matrix::Zero(2, 2)); };
  model.b = [](const StatePoint&) { return Vector(Vector::Constant(1, 1.0)); };
  SimConfig cfg = small_config(1, 1.0, 0.1);
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.2}, {1.0}));
  ASSERT_EQ(bundle.n_recorded(), 11u);
  double y = 1.0;
  for (std::size_t r = 0; r < bundle.n_recorded(); ++r) {
    EXPECT_NEAR(bundle.state(0, r).x(0), 0.2 + 0.1 * r, 1e-12);
    EXPECT_NEAR(bundle.state(0, r).y(0), y, 1e-12);
    y -= 0.1 * y;
  }
}

TEST(Simulate, IndependentOfWorkersAndChunks) {
  const CoefficientModel model = make_model("wf-with-free-coord");
  SimConfig cfg = small_config(37);
  cfg.retain_increments = true;
  const PathBundle one = simulate_standard(model, cfg, pt({0.3}, {0.0}));
  cfg.workers = 3;
  expect_same_bundle(one, simulate_standard(model, cfg, pt({0.3}, {0.0})));
  PathBundle chunks = simulate(model, cfg, pt({0.3}, {0.0}), SdeKind::kStandard, 0, 10);
  append_bundle(chunks, simulate(model, cfg, pt({0.3}, {0.0}), SdeKind::kStandard, 10, 27));
  expect_same_bundle(one, chunks);
}

TEST(Simulate, ZeroSingularDriftReproducesStandardPaths) {
  CoefficientModel model = kimura::testing::with_power_drift(make_model("const-wf-1d"), 0.0, 0.1);
  SimConfig cfg = small_config(50);
  cfg.retain_increments = true;
  const PathBundle standard = simulate_standard(model, cfg, pt({0.1}));
  PathBundle singular = simulate_singular(model, cfg, pt({0.1}));
  singular.kind = SdeKind::kStandard;
  expect_same_bundle(standard, singular);
}

TEST(Simulate, RejectsInadmissibleQ) {
  CoefficientModel model = make_model("power-singular");
  model.declared.q = 0.3;
  EXPECT_THROW(simulate_singular(model, small_config(), pt({0.5})), InfeasibleParameterError);
}

TEST(Simulate, RejectsBadInputs) {
  const CoefficientModel model = make_model("const-wf-1d");
  EXPECT_THROW(simulate_standard(model, small_config(), pt({-0.1})), InvalidArgumentError);
  EXPECT_THROW(simulate_standard(model, small_config(), pt({0.1}, {0.0})), DimensionError);
  SimConfig bad = small_config();
  bad.dt = 0.0;
  EXPECT_THROW(simulate_standard(model, bad, pt({0.1})), InvalidArgumentError);
  EXPECT_THROW(simulate_singular(model, small_config(), pt({0.1})), InvalidArgumentError);
}

TEST(Simulate, ClampedPathsStayCanonical) {
  const CoefficientModel model = make_model("cir-like");
  const PathBundle bundle = simulate_standard(model, small_config(200, 1.0, 1e-2), pt({0.01}));
  for (double v : bundle.states) EXPECT_GE(v, 0.0);
  double negativity = 0.0;
  for (double v : bundle.negativity) negativity = std::max(negativity, v);
  EXPECT_GT(negativity, 0.0);
}

TEST(Simulate, RecordStrideKeepsTheFinalTime) {
  SimConfig cfg = small_config(4, 1.0, 0.1);
  cfg.record_stride = 3;
  const PathBundle bundle = simulate_standard(make_model("const-wf-1d"), cfg, pt({0.5}));
  EXPECT_EQ(bundle.recorded_steps, std::vector<int>({0, 3, 6, 9, 10}));
  EXPECT_DOUBLE_EQ(bundle.times.back(), 1.0);
}

TEST(Rng, PooledIncrementsAreStandardNormal) {
  const CoefficientModel model = make_model("const-wf-1d");
  SimConfig cfg = small_config(1000, 1.0, 1e-3);
  cfg.retain_increments = true;
  cfg.record_stride = 1000;
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.5}));
  const double scale = 1.0 / std::sqrt(bundle.dt);
  double sum = 0.0, sq = 0.0;
  for (double v : bundle.increments) {
    sum += v * scale;
    sq += v * v * scale * scale;
  }
  const double N = static_cast<double>(bundle.increments.size());
  ASSERT_EQ(N, 1e6);
  EXPECT_LE(std::abs(sum / N), 4.0 / std::sqrt(N));
  EXPECT_NEAR(sq / N - (sum / N) * (sum / N), 1.0, 0.01);
}

TEST(Rng, StreamsDifferAcrossPathsAndSeeds) {
  Vector a(2), b(2), c(2);
  brownian_increment(stream_key(1, 0), 0, 1.0, a);
  brownian_increment(stream_key(1, 1), 0, 1.0, b);
  brownian_increment(stream_key(2, 0), 0, 1.0, c);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  Vector again(2);
  brownian_increment(stream_key(1, 0), 0, 1.0, again);
  EXPECT_EQ(a, again);
}

TEST(Support, LogDriftNegativityShrinksWithDt) {
  const CoefficientModel model = make_model("log-drift");
  double last = std::numeric_limits<double>::infinity();
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    SimConfig cfg = small_config(400, 0.2, dt);
    cfg.record_stride = cfg.steps();
    const PathBundle bundle = simulate_singular(model, cfg, pt({0.02}));
    for (double v : bundle.states) EXPECT_GE(v, 0.0);
    const double q = quantile(bundle.negativity, 0.999);
    EXPECT_LT(q, last) << "dt " << dt;
    last = q;
  }
}

TEST(Support, PowerSingularTimeAverageStableInFloor) {
  const CoefficientModel model = make_model("power-singular");
  std::vector<double> averages;
  for (double floor : {1e-6, 1e-8, 1e-10}) {
    SimConfig cfg = small_config(500, 1.0, 1e-3);
    cfg.epsilon_floor = floor;
    const PathBundle bundle = simulate_singular(model, cfg, pt({0.2}));
    const auto profile = khasminskii_profile(bundle, model.declared.q / 2.0, 1.0, floor);
    averages.push_back(profile.back().mean);
  }
  EXPECT_TRUE(std::isfinite(averages[0]));
  EXPECT_NEAR(averages[1], averages[0], 0.02 * averages[0]);
  EXPECT_NEAR(averages[2], averages[0], 0.02 * averages[0]);
}

TEST(Reconstruction, InteriorStepsAreExact) {
  const CoefficientModel model = make_model("wf-with-free-coord");
  SimConfig cfg = small_config(20, 0.5, 1e-3);
  cfg.retain_increments = true;
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.6}, {0.0}));
  const BrownianReconstruction rec = reconstruct_brownian(model, bundle);
  EXPECT_LE(rec.max_deviation, 1e-10);
  EXPECT_EQ(rec.boundary_steps, 0u);
}

TEST(Reconstruction, BoundaryStepsContributeZero) {
  const CoefficientModel model = make_model("const-wf-1d");
  SimConfig cfg = small_config(10, 0.1, 1e-3);
  cfg.retain_increments = true;
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.0}));
  const BrownianReconstruction rec = reconstruct_brownian(model, bundle);
  EXPECT_GE(rec.boundary_steps, 10u);
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    EXPECT_EQ(rec.increments[p * bundle.steps], 0.0);
  }
  EXPECT_LE(rec.max_deviation, 1e-10);
}

TEST(Reconstruction, DegenerateDispersionRaises) {
  const CoefficientModel model = scalar_model(1.0, 0.0);
  SimConfig cfg = small_config(2, 0.1, 1e-2);
  cfg.retain_increments = true;
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.5}));
  EXPECT_THROW(reconstruct_brownian(model, bundle), SimulationError);
}

TEST(Simulate, ModelFailuresCarryPathAndStep) {
  CoefficientModel model = make_model("const-wf-1d");
  model.b = [](const StatePoint& z) {
    if (z.x(0) > 0.55) throw std::runtime_error("boom");
    return Vector(Vector::Constant(1, 1.0));
  };
  SimConfig cfg = small_config(3, 1.0, 1e-2);
  cfg.master_seed = 1;
  try {
    simulate_standard(model, cfg, pt({0.5}));
    FAIL() << "expected a SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_GE(e.path(), 0);
    EXPECT_GT(e.step(), 0);
  }
}
