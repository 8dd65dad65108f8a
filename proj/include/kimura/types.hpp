#pragma once

#include <Eigen/Dense>

namespace kimura {

// Upper bound on n + m. Dense types are stack-allocated up to this size so
// the per-step work in the engine never touches the heap.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

}  // namespace kimura
