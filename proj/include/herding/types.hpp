#pragma once

#include <Eigen/Dense>

namespace herding {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

// Planar positions stacked as [x_1 y_1 x_2 y_2 ...]. Used for the herd state
// (2m entries), the herder action (2n entries) and every 2m-vector derived
// from them (velocities, residuals).
template <typename Scalar>
using Stacked = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using StackedRef = Eigen::Ref<const Stacked<Scalar>>;

template <typename Scalar>
using MatrixRef = Eigen::Ref<const Matrix<Scalar>>;

// Exact equality that tolerates mismatched shapes.
template <typename A, typename B>
bool same_values(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

// Number of planar points held in a stacked vector.
template <typename Derived>
Eigen::Index point_count(const Eigen::MatrixBase<Derived>& stacked) {
  return stacked.size() / 2;
}

template <typename Derived>
auto point(const Eigen::MatrixBase<Derived>& stacked, Eigen::Index i) {
  return stacked.template segment<2>(2 * i);
}

template <typename Derived>
auto point(Eigen::MatrixBase<Derived>& stacked, Eigen::Index i) {
  return stacked.template segment<2>(2 * i);
}

}  // namespace herding
