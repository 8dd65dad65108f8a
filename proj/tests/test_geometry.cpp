#include <random>

#include <gtest/gtest.h>

#include <kimura/geometry.hpp>

#include "support.hpp"

using namespace kimura;
using kimura::testing::pt;

TEST(Project, ClampsNegativeOrthantCoordinatesOnly) {
  RawPoint p{Vector(3), 2};
  p.coords << -1.0, 2.0, 3.0;
  const StatePoint z = project(p);
  EXPECT_EQ(z, pt({0.0, 2.0}, {3.0}));
}

TEST(Project, FixesCanonicalPoints) {
  const StatePoint z = pt({0.0, 0.7, 5.0}, {-2.0});
  EXPECT_EQ(project(z), z);
}

TEST(Project, IdempotentAndOneLipschitz) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    RawPoint p{Vector(4), 3};
    RawPoint q{Vector(4), 3};
    for (int i = 0; i < 4; ++i) {
      p.coords(i) = g(gen);
      q.coords(i) = g(gen);
    }
    const StatePoint pp = project(p);
    EXPECT_EQ(project(pp), pp);
    EXPECT_LE((project(p).stacked() - project(q).stacked()).norm(), (p.coords - q.coords).norm() + 1e-15);
  }
}

TEST(RegionOf, MembershipRule) {
  EXPECT_EQ(region_of(pt({0.5, 3.0})).members(), std::vector<int>({0}));
  EXPECT_TRUE(region_of(pt({2.0, 5.0})).members().empty());
  EXPECT_EQ(region_of(pt({1.0, 1.0})).members(), std::vector<int>({0, 1}));
  EXPECT_EQ(region_of(pt({0.0, 1.5})).members(), std::vector<int>({0}));
}

TEST(CoordinateDistance, Examples) {
  EXPECT_DOUBLE_EQ(wf_coordinate_distance(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(wf_coordinate_distance(4.0, 9.0), 5.0);
  EXPECT_DOUBLE_EQ(wf_coordinate_distance(0.25, 4.0), 3.75);
  EXPECT_DOUBLE_EQ(wf_coordinate_distance(0.25, 1.0), 0.5);
}

TEST(CoordinateDistance, SymmetricAndZeroOnlyOnDiagonal) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double s = u(gen);
    const double t = u(gen);
    EXPECT_EQ(wf_coordinate_distance(s, t), wf_coordinate_distance(t, s));
    EXPECT_GT(wf_coordinate_distance(s, t), 0.0);
    EXPECT_EQ(wf_coordinate_distance(s, s), 0.0);
  }
}

TEST(WfDistance, Examples) {
  const StatePoint z = pt({0.3, 2.0}, {1.0});
  EXPECT_EQ(wf_distance(z, z), 0.0);
  EXPECT_DOUBLE_EQ(wf_distance(pt({0.0}, {0.0}), pt({1.0}, {2.0})), 3.0);
}

TEST(WfDistance, RejectsMismatchedSplits) {
  EXPECT_THROW(wf_distance(pt({0.1}), pt({0.1}, {0.0})), DimensionError);
}

// Both inequalities of the sandwich with c = 1, against the bracketed expression
// written out here from the region assignment of each point.
TEST(WfDistance, SandwichOnRandomPairs) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + trial % 4;
    const int m = trial % 3;
    Vector x0(n), x1(n), y0(m), y1(m);
    for (int i = 0; i < n; ++i) {
      x0(i) = u(gen) < 0.5 ? u(gen) : 1.0 + 4.0 * u(gen);
      x1(i) = u(gen) < 0.5 ? u(gen) : 1.0 + 4.0 * u(gen);
    }
    for (int l = 0; l < m; ++l) {
      y0(l) = 6.0 * u(gen) - 3.0;
      y1(l) = 6.0 * u(gen) - 3.0;
    }
    const StatePoint z0(x0, y0), z1(x1, y1);
    const RegionIndex I = region_of(z0), J = region_of(z1);
    double a = 0.0, b = 0.0, c = 0.0;
    for (int i = 0; i < n; ++i) {
      if (I.contains(i) && J.contains(i)) {
        a = std::max(a, std::abs(std::sqrt(x0(i)) - std::sqrt(x1(i))));
      } else {
        b = std::max(b, std::abs(x0(i) - x1(i)));
      }
    }
    for (int l = 0; l < m; ++l) c = std::max(c, std::abs(y0(l) - y1(l)));
    const double bracket = a + b + c;
    const double rho = wf_distance(z0, z1);
    ASSERT_GE(rho, bracket - 1e-12) << "trial " << trial;
    ASSERT_LE(rho, bracket + 1e-12) << "trial " << trial;
    ASSERT_EQ(rho, wf_distance(z1, z0));
  }
}

TEST(SpacetimeDistance, Examples) {
  const StatePoint z = pt({0.2}, {1.0});
  EXPECT_EQ(spacetime_distance(SpaceTimePoint{0.5, z}, SpaceTimePoint{0.5, z}), 0.0);
  EXPECT_DOUBLE_EQ(spacetime_distance(SpaceTimePoint{0.0, z}, SpaceTimePoint{4.0, z}), 2.0);
  // rho_0((0.25), (1)) = 0.5
  EXPECT_DOUBLE_EQ(spacetime_distance(SpaceTimePoint{0.0, pt({0.25})}, SpaceTimePoint{1.0, pt({1.0})}), 1.5);
}

TEST(SpacetimeDistance, Symmetric) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const SpaceTimePoint p{u(gen), pt({u(gen), u(gen)}, {u(gen)})};
    const SpaceTimePoint q{u(gen), pt({u(gen), u(gen)}, {u(gen)})};
    EXPECT_EQ(spacetime_distance(p, q), spacetime_distance(q, p));
  }
}

TEST(Geometry, WorksForOtherScalars) {
  StatePointT<long double> a(VectorX<long double>::Constant(1, 0.25L), VectorX<long double>(0));
  StatePointT<long double> b(VectorX<long double>::Constant(1, 1.0L), VectorX<long double>(0));
  EXPECT_NEAR(static_cast<double>(wf_distance(a, b)), 0.5, 1e-18);
  StatePointT<float> c(VectorX<float>::Constant(1, 4.0f), VectorX<float>(0));
  StatePointT<float> d(VectorX<float>::Constant(1, 9.0f), VectorX<float>(0));
  EXPECT_FLOAT_EQ(wf_distance(c, d), 5.0f);
}
