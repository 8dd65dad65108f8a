#include <cmath>

#include <gtest/gtest.h>

#include <kimura/catalog.hpp>
#include <kimura/errors.hpp>
#include <kimura/girsanov.hpp>

#include "support.hpp"

using namespace kimura;
using kimura::testing::pt;
using kimura::testing::scalar_model;
using kimura::testing::with_power_drift;

namespace {

SimConfig retained(std::size_t paths, double T = 0.5, double dt = 1e-2) {
  SimConfig cfg;
  cfg.horizon_T = T;
  cfg.dt = dt;
  cfg.n_paths = paths;
  cfg.master_seed = 9;
  cfg.retain_increments = true;
  return cfg;
}

// const-wf-1d with a mild singular drift h(s) = s^-0.1.
CoefficientModel mild() {
  CoefficientModel model = with_power_drift(make_model("const-wf-1d"), 0.3, 0.1);
  model.declared.q = 0.1;
  return model;
}

}  // namespace

TEST(Theta, Examples) {
  CoefficientModel zero = with_power_drift(scalar_model(1.0, 1.0), 0.0, 0.1);
  EXPECT_TRUE(theta_eval(zero, pt({0.5}), 1e-8).isZero(0.0));
  CoefficientModel power = with_power_drift(scalar_model(1.0, 1.0), 1.0, 0.1);
  EXPECT_NEAR(theta_eval(power, pt({4.0}), 1e-8)(0), std::pow(4.0, -0.1), 1e-15);
  EXPECT_NEAR(theta_eval(power, pt({4.0}), 1e-8)(0), 0.8706, 1e-4);
  // The floor applies inside h only.
  EXPECT_NEAR(theta_eval(power, pt({0.0}), 1e-8)(0), std::pow(1e-8, -0.1), 1e-9);
}

TEST(Weights, ZeroDriftGivesUnitWeights) {
  CoefficientModel model = with_power_drift(make_model("const-wf-1d"), 0.0, 0.1);
  const PathBundle bundle = simulate_standard(model, retained(20), pt({0.4}));
  const WeightedPathBundle w = accumulate_log_weight(bundle, model, WeightDirection::kStandardToSingular);
  for (double lw : w.log_weights) EXPECT_EQ(lw, 0.0);
  std::vector<double> values = bundle.terminal_values(0);
  for (Normalization norm : {Normalization::kRaw, Normalization::kSelfNormalized}) {
    const WeightedEstimate e = reweighted_expectation(w.terminal_log_weights(), values, norm, w.excluded);
    EXPECT_NEAR(e.estimate, mean_and_stderr(values).mean, 1e-15);
    EXPECT_EQ(e.mean_weight, 1.0);
  }
}

TEST(Weights, SingleStepByHand) {
  const CoefficientModel model = mild();
  SimConfig cfg = retained(1, 0.01, 0.01);
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.7}));
  ASSERT_EQ(bundle.steps, 1);
  const double theta = 0.3 * std::pow(0.7, -0.1);
  const double dW = bundle.increment(0, 0)(0);
  const WeightedPathBundle w = accumulate_log_weight(bundle, model, WeightDirection::kStandardToSingular);
  EXPECT_NEAR(w.log_weight(0, 1), theta * dW - 0.5 * theta * theta * 0.01, 1e-15);
  const WeightedPathBundle back = accumulate_log_weight(bundle, model, WeightDirection::kSingularToStandard);
  EXPECT_NEAR(back.log_weight(0, 1), -theta * dW - 0.5 * theta * theta * 0.01, 1e-15);
}

TEST(Weights, StreamingMatchesPostHocAccumulation) {
  const CoefficientModel model = make_model("log-drift");
  SimConfig cfg = retained(30);
  const PathBundle bundle = simulate_standard(model, cfg, pt({0.2}));
  const WeightedPathBundle post = accumulate_log_weight(bundle, model, WeightDirection::kStandardToSingular, 2);
  const WeightedPathBundle streamed =
      simulate_weighted(model, cfg, pt({0.2}), WeightDirection::kStandardToSingular, 0, cfg.n_paths);
  EXPECT_EQ(streamed.base.states, bundle.states);
  ASSERT_EQ(streamed.log_weights.size(), post.log_weights.size());
  for (std::size_t k = 0; k < post.log_weights.size(); ++k) {
    EXPECT_NEAR(streamed.log_weights[k], post.log_weights[k], 1e-12);
  }
}

TEST(Weights, RoundTripCancels) {
  const CoefficientModel model = make_model("log-drift");
  const PathBundle standard = simulate_standard(model, retained(50, 1.0, 1e-3), pt({0.3}));
  const WeightedPathBundle forward = accumulate_log_weight(standard, model, WeightDirection::kStandardToSingular);
  // Under the new measure the singular equation is driven by dW - theta dt.
  const PathBundle as_singular = shift_increments(standard, model);
  EXPECT_EQ(as_singular.kind, SdeKind::kSingular);
  const WeightedPathBundle backward =
      accumulate_log_weight(as_singular, model, WeightDirection::kSingularToStandard);
  for (std::size_t p = 0; p < standard.n_paths(); ++p) {
    const std::size_t last = standard.n_recorded() - 1;
    EXPECT_NEAR(forward.log_weight(p, last) + backward.log_weight(p, last), 0.0, 1e-10);
  }
  // The shifted increments drive the singular scheme along the very same states.
  for (std::size_t p = 0; p < 5; ++p) {
    for (int k = 0; k < standard.steps; ++k) {
      const StepResult r = step_singular(model, standard.state(p, k), standard.dt, as_singular.increment(p, k),
                                         standard.epsilon_floor);
      ASSERT_NEAR(r.next.x(0), standard.state(p, k + 1).x(0), 1e-12);
    }
  }
}

TEST(Weights, MeanWeightIsOneAtEveryRecordedTime) {
  const CoefficientModel model = mild();
  SimConfig cfg = retained(20000, 1.0, 1e-2);
  cfg.retain_increments = false;
  cfg.record_stride = 25;
  const WeightedPathBundle w =
      simulate_weighted(model, cfg, pt({0.5}), WeightDirection::kStandardToSingular, 0, cfg.n_paths);
  for (std::size_t r = 1; r < w.base.n_recorded(); ++r) {
    std::vector<double> values(w.n_paths());
    for (std::size_t p = 0; p < w.n_paths(); ++p) values[p] = std::exp(w.log_weight(p, r));
    const MeanEstimate m = mean_and_stderr(values);
    EXPECT_LE(std::abs(m.mean - 1.0), 3.0 * m.stderr_) << "t = " << w.base.times[r];
  }
  std::vector<double> ones(w.n_paths(), 1.0);
  const WeightedEstimate e = reweighted_expectation(w.terminal_log_weights(), ones, Normalization::kRaw, w.excluded);
  EXPECT_EQ(e.estimate, e.mean_weight);
}

TEST(Weights, ExcludesOverflowingPaths) {
  std::vector<double> lw = {0.0, 800.0, -0.1, std::nan("")};
  std::vector<double> f = {1.0, 2.0, 3.0, 4.0};
  const WeightedEstimate e = reweighted_expectation(lw, f, Normalization::kRaw, {});
  EXPECT_EQ(e.excluded, 2u);
  EXPECT_EQ(e.used, 2u);
  std::vector<double> all_bad = {701.0, -900.0};
  std::vector<double> g = {1.0, 1.0};
  EXPECT_THROW(reweighted_expectation(all_bad, g, Normalization::kRaw, {}), EstimationError);
}

TEST(Weights, SelfNormalizedEstimate) {
  std::vector<double> lw = {std::log(1.0), std::log(3.0)};
  std::vector<double> f = {2.0, 6.0};
  const WeightedEstimate e = reweighted_expectation(lw, f, Normalization::kSelfNormalized, {});
  EXPECT_DOUBLE_EQ(e.estimate, (2.0 + 18.0) / 4.0);
  const WeightedEstimate raw = reweighted_expectation(lw, f, Normalization::kRaw, {});
  EXPECT_DOUBLE_EQ(raw.estimate, 10.0);
}

TEST(Ess, Examples) {
  std::vector<double> equal(7, 0.3);
  EXPECT_NEAR(ess(equal), 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(ess(std::vector<double>{1.0, 0.0, 0.0, 0.0}), 1.0);
  EXPECT_NEAR(ess(std::vector<double>{1.0, 1.0, 2.0}), 16.0 / 6.0, 1e-15);
  EXPECT_THROW(ess(std::vector<double>{0.0, 0.0}), InvalidArgumentError);
  EXPECT_NEAR(ess_from_log_weights(std::vector<double>{1000.0, 1000.0, 1000.0 + std::log(2.0)}), 16.0 / 6.0, 1e-12);
}

TEST(ThetaBound, DefaultLambdaCoversSamplesAndSmallLambdaFails) {
  const CoefficientModel model = make_model("log-drift");
  const auto samples = box_samples(1, 0, 500, 10.0, 1e-6);
  const double lambda = default_lambda(model, samples);
  EXPECT_GT(lambda, 0.0);
  EXPECT_TRUE(check_theta_bound(model, samples, lambda, model.declared.q, 1e-8).passed());
  const DiagnosticReport small = check_theta_bound(model, samples, 0.01, model.declared.q, 1e-8);
  EXPECT_FALSE(small.passed());
  EXPECT_GT(std::get<std::int64_t>(small.metadata.at("violations")), 0);
}
