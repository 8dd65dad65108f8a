#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <kimura/errors.hpp>
#include <kimura/types.hpp>

// The closed state space [0, inf)^n x R^m, its projection, the regions M_I and the
// anisotropic distance of the WF Hoelder spaces.

namespace kimura {

/// A point z = (x, y) with orthant coordinates x (length n) and free coordinates y (length m).
template <typename Scalar>
struct StatePointT {
  VectorX<Scalar> x;
  VectorX<Scalar> y;

  StatePointT() = default;
  StatePointT(VectorX<Scalar> x_, VectorX<Scalar> y_) : x(std::move(x_)), y(std::move(y_)) {}

  /// Zero point with the given split.
  static StatePointT zero(int n, int m) {
    return StatePointT(VectorX<Scalar>::Zero(n), VectorX<Scalar>::Zero(m));
  }

  /// Splits a stacked (x, y) vector after the first n entries.
  static StatePointT from_stacked(const VectorX<Scalar>& z, int n) {
    const int m = static_cast<int>(z.size()) - n;
    return StatePointT(z.head(n), z.tail(m));
  }

  int n() const { return static_cast<int>(x.size()); }
  int m() const { return static_cast<int>(y.size()); }
  int dim() const { return n() + m(); }

  VectorX<Scalar> stacked() const {
    VectorX<Scalar> z(dim());
    z << x, y;
    return z;
  }

  /// True iff x_i >= 0 for every orthant coordinate.
  bool canonical() const { return n() == 0 || x.minCoeff() >= Scalar(0); }

  /// True iff every orthant coordinate is strictly positive.
  bool interior() const { return n() == 0 || x.minCoeff() > Scalar(0); }

  bool operator==(const StatePointT& other) const {
    return x.size() == other.x.size() && y.size() == other.y.size() && x == other.x && y == other.y;
  }
};

/// An unconstrained point of R^{n+m}; the first n coordinates are the orthant ones.
template <typename Scalar>
struct RawPointT {
  VectorX<Scalar> coords;
  int n = 0;

  int m() const { return static_cast<int>(coords.size()) - n; }
};

/// A (time, state) pair.
template <typename Scalar>
struct SpaceTimePointT {
  Scalar t{};
  StatePointT<Scalar> z;
};

using StatePoint = StatePointT<double>;
using RawPoint = RawPointT<double>;
using SpaceTimePoint = SpaceTimePointT<double>;

/// Subset I of the orthant indices {0, ..., n-1}, stored as a bit mask.
class RegionIndex {
 public:
  RegionIndex() = default;
  RegionIndex(int n, std::uint32_t mask) : n_(n), mask_(mask & full_mask(n)) {}

  static RegionIndex from_members(int n, const std::vector<int>& members) {
    std::uint32_t mask = 0;
    for (int i : members) {
      if (i < 0 || i >= n) {
        throw DimensionError("region member out of range");
      }
      mask |= 1U << i;
    }
    return RegionIndex(n, mask);
  }

  int n() const { return n_; }
  std::uint32_t mask() const { return mask_; }
  bool contains(int i) const { return (mask_ >> i) & 1U; }
  RegionIndex complement() const { return RegionIndex(n_, ~mask_); }

  std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i) {
      if (contains(i)) {
        out.push_back(i);
      }
    }
    return out;
  }

  bool operator==(const RegionIndex&) const = default;

 private:
  static std::uint32_t full_mask(int n) { return n >= 32 ? ~0U : ((1U << n) - 1U); }

  int n_ = 0;
  std::uint32_t mask_ = 0;
};

/// Nearest point of the closed state space: clamps orthant coordinates at zero.
template <typename Scalar>
StatePointT<Scalar> project(const RawPointT<Scalar>& p) {
  const int m = p.m();
  return StatePointT<Scalar>(p.coords.head(p.n).cwiseMax(Scalar(0)), p.coords.tail(m));
}

/// Overload used by the engine, where a state is evaluated at its projection.
template <typename Scalar>
StatePointT<Scalar> project(const StatePointT<Scalar>& z) {
  return StatePointT<Scalar>(z.x.cwiseMax(Scalar(0)), z.y);
}

/// Region containing z; closure points with x_i in {0, 1} belong to I.
template <typename Scalar>
RegionIndex region_of(const StatePointT<Scalar>& z) {
  std::uint32_t mask = 0;
  for (int i = 0; i < z.n(); ++i) {
    if (z.x(i) <= Scalar(1)) {
      mask |= 1U << i;
    }
  }
  return RegionIndex(z.n(), mask);
}

/// Per-coordinate WF distance: |sqrt(s) - sqrt(t)| when both are <= 1, |s - t| otherwise.
template <typename Scalar>
Scalar wf_coordinate_distance(Scalar s, Scalar t) {
  using std::abs;
  using std::sqrt;
  if (std::max(s, t) <= Scalar(1)) {
    return abs(sqrt(s) - sqrt(t));
  }
  return abs(s - t);
}

/// Spatial distance rho_0. Coordinates with both values in [0, 1] contribute
/// through their own max of sqrt-distances, the remaining orthant coordinates
/// through a max of plain distances, and the free coordinates through a third max.
/// This is exactly the bracketed expression of the region equivalence with c = 1.
template <typename Scalar>
Scalar wf_distance(const StatePointT<Scalar>& z0, const StatePointT<Scalar>& z1) {
  if (z0.n() != z1.n() || z0.m() != z1.m()) {
    throw DimensionError("wf_distance: points have different (n, m)");
  }
  Scalar near_boundary(0);
  Scalar far(0);
  for (int i = 0; i < z0.n(); ++i) {
    const Scalar d = wf_coordinate_distance(z0.x(i), z1.x(i));
    if (std::max(z0.x(i), z1.x(i)) <= Scalar(1)) {
      near_boundary = std::max(near_boundary, d);
    } else {
      far = std::max(far, d);
    }
  }
  Scalar free(0);
  if (z0.m() > 0) {
    free = (z0.y - z1.y).cwiseAbs().maxCoeff();
  }
  return near_boundary + far + free;
}

/// rho((t0, z0), (t1, z1)) = rho_0(z0, z1) + sqrt(|t0 - t1|).
template <typename Scalar>
Scalar spacetime_distance(const SpaceTimePointT<Scalar>& p0, const SpaceTimePointT<Scalar>& p1) {
  using std::abs;
  using std::sqrt;
  return wf_distance(p0.z, p1.z) + sqrt(abs(p0.t - p1.t));
}

}  // namespace kimura
