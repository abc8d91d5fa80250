#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/SVD>

#include "herding/errors.hpp"
#include "herding/herd_dynamics.hpp"
#include "herding/types.hpp"

namespace herding {

// Central differences with per-coordinate step max(min_step, relative_step * |c|).
template <typename Scalar>
struct FiniteDiffSettings {
  Scalar relative_step{1e-6};
  Scalar min_step{1e-6};

  Scalar step_for(Scalar coordinate) const {
    using std::abs;
    return std::max(min_step, relative_step * abs(coordinate));
  }
};

// Column-by-column central-difference Jacobian of `fn` at `point`.
template <typename Scalar, typename Fn>
Matrix<Scalar> central_difference_jacobian(Fn&& fn, const StackedRef<Scalar>& at,
                                           const FiniteDiffSettings<Scalar>& settings = {}) {
  Stacked<Scalar> probe = at;
  Matrix<Scalar> jac;
  for (Eigen::Index c = 0; c < at.size(); ++c) {
    const Scalar step = settings.step_for(at(c));
    probe(c) = at(c) + step;
    const Stacked<Scalar> forward = fn(probe);
    probe(c) = at(c) - step;
    const Stacked<Scalar> backward = fn(probe);
    probe(c) = at(c);
    if (c == 0) jac.resize(forward.size(), at.size());
    jac.col(c) = (forward - backward) / (Scalar(2) * step);
  }
  return jac;
}

// d h / d x (2m x 2m) and d h / d u (2m x 2n).
template <typename Scalar>
struct JacobianPair {
  Matrix<Scalar> x;
  Matrix<Scalar> u;
};

template <typename Scalar>
Matrix<Scalar> jacobian_u(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                          const StackedRef<Scalar>& x, const StackedRef<Scalar>& u, Scalar t,
                          const FiniteDiffSettings<Scalar>& settings = {}) {
  return central_difference_jacobian<Scalar>(
      [&](const Stacked<Scalar>& probe) { return residual_h<Scalar>(config, dd, x, probe, t); }, u,
      settings);
}

template <typename Scalar>
Matrix<Scalar> jacobian_x(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                          const StackedRef<Scalar>& x, const StackedRef<Scalar>& u, Scalar t,
                          const FiniteDiffSettings<Scalar>& settings = {}) {
  return central_difference_jacobian<Scalar>(
      [&](const Stacked<Scalar>& probe) { return residual_h<Scalar>(config, dd, probe, u, t); }, x,
      settings);
}

template <typename Scalar>
JacobianPair<Scalar> jacobians(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                               const StackedRef<Scalar>& x, const StackedRef<Scalar>& u, Scalar t,
                               const FiniteDiffSettings<Scalar>& settings = {}) {
  return {jacobian_x(config, dd, x, u, t, settings), jacobian_u(config, dd, x, u, t, settings)};
}

// Reciprocal condition number below which a symmetric system is singular.
inline constexpr double kSingularRcond = 1e-14;

// J^T (J J^T + mu I)^{-1}: right pseudoinverse of a full-row-rank J, damped
// least squares when mu > 0.
template <typename Scalar>
Matrix<Scalar> damped_right_pinv(const MatrixRef<Scalar>& jac, Scalar mu) {
  if (!jac.allFinite()) throw SingularSystem("Jacobian has non-finite entries");
  if (mu < 0) throw InvariantViolation("damping", "must be >= 0");
  const Eigen::Index rows = jac.rows();
  Matrix<Scalar> gram = jac * jac.transpose();
  gram.diagonal().array() += mu;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  const Scalar largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  const Scalar smallest = eig.eigenvalues().minCoeff();
  if (rows > 0 && !(smallest > Scalar(kSingularRcond) * largest)) {
    throw SingularSystem("J J^T + mu I is numerically singular (rcond " +
                         std::to_string(static_cast<double>(largest > 0 ? smallest / largest : 0)) +
                         ")");
  }
  return jac.transpose() * gram.ldlt().solve(Matrix<Scalar>::Identity(rows, rows));
}

template <typename Scalar>
struct RankCheck {
  bool satisfied{false};
  Scalar smallest_singular_value{0};
};

// Local existence of the action: J_u J_u^T must be non-singular, judged by
// its smallest singular value against `tol` times its largest.
template <typename Scalar>
RankCheck<Scalar> rank_condition(const MatrixRef<Scalar>& ju, Scalar tol = Scalar(1e-8)) {
  const Matrix<Scalar> gram = ju * ju.transpose();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(gram);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return {false, Scalar(0)};
  const Scalar smallest = sv(sv.size() - 1);
  return {smallest > tol * sv(0), smallest};
}

}  // namespace herding
