#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <kimura/catalog.hpp>
#include <kimura/diagnostics.hpp>
#include <kimura/errors.hpp>

#include "support.hpp"

using namespace kimura;
using kimura::testing::pt;
using kimura::testing::scalar_model;

namespace {

SimConfig config(std::size_t paths, double T, double dt, std::uint64_t seed = 3) {
  SimConfig cfg;
  cfg.horizon_T = T;
  cfg.dt = dt;
  cfg.n_paths = paths;
  cfg.master_seed = seed;
  return cfg;
}

// Paths frozen at x = 1 in every coordinate.
PathBundle frozen(int n, double T, double dt) {
  const auto model = kimura::testing::constant_model(Vector::Zero(n), Vector(0), Matrix::Zero(n, n));
  return simulate_standard(model, config(3, T, dt), StatePoint(Vector::Ones(n), Vector(0)));
}

TestFunction constant_function(double c) {
  TestFunction u;
  u.value = [c](const StatePoint&) { return c; };
  u.gradient = [](const StatePoint& z) { return Vector(Vector::Zero(z.dim())); };
  u.hessian = [](const StatePoint& z) { return Matrix(Matrix::Zero(z.dim(), z.dim())); };
  return u;
}

}  // namespace

TEST(Khasminskii, FrozenUnitPaths) {
  for (int n : {1, 2, 3}) {
    const DiagnosticReport r = khasminskii_estimate(frozen(n, 2.0, 0.1), 0.1, 1.0);
    EXPECT_NEAR(r.estimate, 2.0 * n, 1e-12);
    EXPECT_EQ(r.stderr_, 0.0);
  }
}

TEST(Khasminskii, SmallHorizonFallsBelowDeltaAndProfileIsMonotone) {
  const CoefficientModel model = make_model("const-wf-1d");
  const PathBundle bundle = simulate_standard(model, config(500, 1.0, 1e-3), pt({0.5}));
  const auto profile = khasminskii_profile(bundle, 0.1, 1.0, 1e-8);
  for (std::size_t r = 1; r < profile.size(); ++r) EXPECT_GE(profile[r].mean, profile[r - 1].mean);
  EXPECT_LT(profile[50].mean, 0.5);
  // Per path the prefix sums are nondecreasing.
  const auto table = additive_functional(bundle, 0.1, 1.0, 1e-8);
  for (std::size_t p = 0; p < bundle.n_paths(); ++p)
    for (std::size_t r = 1; r < bundle.n_recorded(); ++r)
      ASSERT_GE(table[p * bundle.n_recorded() + r], table[p * bundle.n_recorded() + r - 1]);
}

TEST(Khasminskii, FloorStableForAdmissibleQ) {
  const DiagnosticReport r =
      khasminskii_estimate(simulate_standard(make_model("const-wf-1d"), config(500, 1.0, 1e-3), pt({0.5})), 0.1, 1.0);
  EXPECT_LT(std::get<double>(r.metadata.at("floor_relative_change")), 0.05);
}

TEST(Khasminskii, FloorSensitiveWhenQExceedsTheBesselThreshold) {
  // b = 0.1, sigma = 1: the path sits on the boundary and X^{-2q} with 2q = 0.5 blows up with the floor.
  const CoefficientModel model = scalar_model(0.1, 1.0);
  const DiagnosticReport r = khasminskii_estimate(simulate_standard(model, config(500, 1.0, 1e-3), pt({0.1})), 0.25, 1.0);
  EXPECT_GT(std::get<double>(r.metadata.at("floor_relative_change")), 1.0);
}

TEST(KhasminskiiBound, Examples) {
  EXPECT_NEAR(khasminskii_bound(0.5, 1.0, 1e-9, 2.0, 1e-9, 1.0, 1, 0, 0.0), 0.25, 1e-8);
  const double direct =
      (std::pow(0.5, 0.6) + 1.0 * std::pow(0.5, -0.4) * 0.1) / ((1.0 - 0.4) * (1.0 / 1.1 - 0.2));
  EXPECT_DOUBLE_EQ(khasminskii_bound(0.5, 0.1, 0.2, 1.0, 0.1, 1.0, 1, 0, 1.0), direct);
  EXPECT_THROW(khasminskii_bound(0.5, 0.1, 0.2, 0.1, 0.1, 1.0, 1, 0, 1.0), InfeasibleParameterError);
}

TEST(KhasminskiiBound, FittedConstantHoldsOnFreshSeeds) {
  const CoefficientModel model = make_model("const-wf-1d");
  const double q = 0.125, r = 0.5;
  const std::vector<double> horizons = {0.1, 0.2, 0.4, 0.8};
  auto estimates = [&](std::uint64_t seed) {
    const auto profile =
        khasminskii_profile(simulate_standard(model, config(400, 0.8, 1e-3, seed), pt({r})), q, 1.0, 1e-8);
    std::vector<MeanEstimate> out;
    for (double T : horizons) out.push_back(profile[static_cast<std::size_t>(std::llround(T / 1e-3))]);
    return out;
  };
  std::vector<double> fit;
  for (const auto& e : estimates(1)) fit.push_back(e.mean);
  const double C = fit_khasminskii_C(horizons, fit, r, q, 1.0, 0.1, 1.0, 1, 0);
  EXPECT_GE(C, 0.0);
  for (std::uint64_t seed : {2, 3}) {
    const auto held_out = estimates(seed);
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      EXPECT_LE(held_out[k].mean - 3.0 * held_out[k].stderr_,
                khasminskii_bound(r, horizons[k], q, 1.0, 0.1, 1.0, 1, 0, C));
    }
  }
}

TEST(Novikov, FrozenUnitPathsGiveExpOfLambdaNT) {
  EXPECT_NEAR(novikov_estimate(frozen(1, 1.0, 0.1), 0.1, 1.0).estimate, std::exp(1.0), 1e-12);
  EXPECT_NEAR(novikov_estimate(frozen(2, 0.5, 0.01), 0.2, 1.5).estimate, std::exp(1.5 * 2 * 0.5), 1e-10);
}

TEST(Novikov, StableUnderDtRefinement) {
  const CoefficientModel model = make_model("const-wf-1d");
  std::vector<DiagnosticReport> reports;
  for (double dt : {1e-2, 1e-3}) {
    reports.push_back(novikov_estimate(simulate_standard(model, config(2000, 1.0, dt), pt({0.5})), 0.1, 1.0));
  }
  EXPECT_TRUE(std::isfinite(reports[0].estimate));
  const double se = std::hypot(reports[0].stderr_, reports[1].stderr_);
  EXPECT_LE(std::abs(reports[0].estimate - reports[1].estimate), 4.0 * se + 0.02);
}

TEST(NovikovChain, Examples) {
  EXPECT_DOUBLE_EQ(novikov_chain_bound(0.5, 0.3, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(novikov_chain_bound(0.5, 1.0, 0.25), 16.0);
  EXPECT_THROW(novikov_chain_bound(1.0, 1.0, 0.25), InvalidArgumentError);
}

TEST(Support, DeterministicNonnegativeDriftHasNoNegativity) {
  const DiagnosticReport r = support_report(simulate_standard(scalar_model(0.5, 0.0), config(4, 1.0, 0.01), pt({0.0})), 5.0);
  EXPECT_EQ(std::get<double>(r.metadata.at("max_negativity")), 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(Support, NegativeDriftFailsWithLinearGrowth) {
  const CoefficientModel model = make_model("negative-drift");
  std::vector<double> q;
  for (double T : {1.0, 2.0}) {
    SimConfig cfg = config(1000, T, 1e-3);
    cfg.clamp_mode = ClampMode::kRecordOnly;
    const DiagnosticReport r = support_report(simulate_standard(model, cfg, pt({0.5})), 5.0);
    EXPECT_FALSE(r.passed());
    q.push_back(r.estimate);
  }
  EXPECT_NEAR(q[1] - q[0], 1.0, 0.1);
}

TEST(Residual, ConstantTestFunctionIsExactlyZero) {
  const DiagnosticReport r =
      martingale_residual(make_model("wf-with-free-coord"), constant_function(2.0), pt({0.4}, {0.1}), config(50, 0.5, 1e-2));
  EXPECT_EQ(r.estimate, 0.0);
}

TEST(Residual, BumpPassesAndDoubledGeneratorFails) {
  const CoefficientModel model = make_model("const-wf-1d");
  const TestFunction u = smooth_bump(pt({0.5}), 1.0);
  ResidualOptions options;
  options.c_dt = 0.7;
  const SimConfig cfg = config(10000, 1.0, 2e-3);
  EXPECT_TRUE(martingale_residual(model, u, pt({0.5}), cfg, options).passed());
  options.generator_scale = 2.0;
  EXPECT_FALSE(martingale_residual(model, u, pt({0.5}), cfg, options).passed());
}

TEST(Residual, RejectsSingularModels) {
  EXPECT_THROW(martingale_residual(make_model("log-drift"), constant_function(1.0), pt({0.4}), config(4, 0.1, 1e-2)),
               InvalidArgumentError);
}

TEST(FitCdt, RecoversExactSlope) {
  std::vector<double> dts = {4e-3, 2e-3, 1e-3};
  std::vector<double> r = {-0.002, 0.001, -0.0005};
  EXPECT_NEAR(fit_c_dt(dts, r), 0.5, 1e-12);
}

TEST(Ks, CriticalValue) {
  EXPECT_NEAR(ks_critical_value(0.01, 1e4, 1e4), 1.6276 * std::sqrt(2e4 / 1e8), 1e-5);
}

TEST(Ks, IdenticalSamplesGiveZero) {
  std::vector<double> a = {0.3, 0.1, 0.7, 0.2};
  const DiagnosticReport r = marginal_compare(a, {}, a);
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(Ks, IntegerWeightsEqualReplication) {
  std::vector<double> a = {0.1, 0.5, 0.9};
  std::vector<double> w = {1.0, 2.0, 1.0};
  std::vector<double> replicated = {0.1, 0.5, 0.5, 0.9};
  std::vector<double> b = {0.2, 0.3, 0.6, 1.2, 1.3};
  EXPECT_DOUBLE_EQ(weighted_ks_statistic(a, w, b), weighted_ks_statistic(replicated, {}, b));
}

TEST(Ks, NullRejectionRateIsAtMostFivePercent) {
  int passes = 0;
  const int seeds = 40;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 gen(1000 + seed);
    std::normal_distribution<double> g;
    std::vector<double> a(10000), b(10000);
    for (auto& v : a) v = g(gen);
    for (auto& v : b) v = g(gen);
    passes += marginal_compare(a, {}, b, 0.01).passed() ? 1 : 0;
  }
  EXPECT_GE(passes, static_cast<int>(0.95 * seeds));
}

TEST(Ks, DegenerateSamplesRaise) {
  std::vector<double> c(5, 1.0);
  EXPECT_THROW(marginal_compare(c, {}, c), EstimationError);
  EXPECT_THROW(marginal_compare({}, {}, c), InvalidArgumentError);
}

TEST(Restart, ZeroSplitAndFlowPropertyPass) {
  const CoefficientModel model = make_model("const-wf-1d");
  SimConfig cfg = config(2000, 1.0, 1e-2);
  EXPECT_TRUE(restart_consistency(model, pt({0.5}), 0.0, cfg, SdeKind::kStandard).passed());
  cfg.n_paths = 10000;
  cfg.dt = 1e-3;
  EXPECT_TRUE(restart_consistency(model, pt({0.5}), 0.5, cfg, SdeKind::kStandard).passed());
}

TEST(Restart, RunningMaximumModelFails) {
  const SimConfig cfg = config(10000, 1.0, 1e-3, 19);
  EXPECT_FALSE(restart_consistency(make_model("running-max"), pt({0.5}), 0.5, cfg, SdeKind::kStandard).passed());
}
