#pragma once

#include <cmath>

#include <Eigen/Eigenvalues>

#include "herding/diff.hpp"
#include "herding/errors.hpp"
#include "herding/herd_dynamics.hpp"
#include "herding/types.hpp"

namespace herding {

// Settings of the expanded (action-dynamics) controller. K_f lives in the
// DesiredDynamics passed alongside.
template <typename Scalar>
struct ExplicitGains {
  Matrix<Scalar> residual_gain;  // K_h, 2m x 2m, SPD
  Scalar damping{0};             // mu of the right pseudoinverse
  FiniteDiffSettings<Scalar> fd{};
};

// u_dot = J_u^+ (h* - J_x x_dot - dh/dt|_explicit), with h* = -K_h h.
//
// `h_rate` is the explicit time dependence of h (zero for static references).
// This form is the one that makes dh/dt = h* when substituted back into the
// chain rule.
template <typename Scalar>
Stacked<Scalar> action_derivative(const StackedRef<Scalar>& h, const StackedRef<Scalar>& f,
                                  const MatrixRef<Scalar>& jx, const MatrixRef<Scalar>& ju,
                                  const MatrixRef<Scalar>& residual_gain, Scalar damping,
                                  const StackedRef<Scalar>& h_rate) {
  const Matrix<Scalar> pinv = damped_right_pinv<Scalar>(ju, damping);
  return pinv * (h_star<Scalar>(residual_gain, h) - jx * f - h_rate);
}

template <typename Scalar>
Stacked<Scalar> action_derivative(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                                  const ExplicitGains<Scalar>& gains, const StackedRef<Scalar>& x,
                                  const StackedRef<Scalar>& u, Scalar t) {
  const Stacked<Scalar> f = stacked_dynamics(config, x, u);
  const Stacked<Scalar> h = f - desired_dynamics(dd, x, t);
  const auto jac = jacobians(config, dd, x, u, t, gains.fd);
  // h = f - f*(x, t); its explicit time derivative is -df*/dt.
  const Stacked<Scalar> h_rate = -desired_dynamics_rate(dd, t);
  return action_derivative<Scalar>(h, f, jac.x, jac.u, gains.residual_gain, gains.damping, h_rate);
}

template <typename Scalar>
struct GasCheck {
  bool negative_definite{false};
  Scalar max_eigenvalue{0};
};

template <typename Scalar>
bool is_symmetric(const MatrixRef<Scalar>& m) {
  using std::abs;
  if (m.rows() != m.cols()) return false;
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale;
}

// Negative definiteness of [[-K_f, 0.5 I], [0.5 I, -K_h]], the condition
// under which x_tilde and h both converge globally.
template <typename Scalar>
GasCheck<Scalar> gas_condition(const MatrixRef<Scalar>& kf, const MatrixRef<Scalar>& kh) {
  if (!is_symmetric<Scalar>(kf)) throw NonSymmetricInput("K_f is not symmetric");
  if (!is_symmetric<Scalar>(kh)) throw NonSymmetricInput("K_h is not symmetric");
  if (kf.rows() != kh.rows()) throw DimensionMismatch("K_f and K_h must have the same size");
  const Eigen::Index size = kf.rows();
  Matrix<Scalar> composite(2 * size, 2 * size);
  composite << -kf, Scalar(0.5) * Matrix<Scalar>::Identity(size, size),
      Scalar(0.5) * Matrix<Scalar>::Identity(size, size), -kh;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(composite, Eigen::EigenvaluesOnly);
  const Scalar top = eig.eigenvalues().maxCoeff();
  // an eigenvalue lost in round-off counts as zero, i.e. semidefinite
  const Scalar scale = std::max(Scalar(1), eig.eigenvalues().cwiseAbs().maxCoeff());
  return {top < -Scalar(1e-12) * scale, top};
}

// Advisory only: the residual should converge much faster than the herd.
template <typename Scalar>
bool residual_gain_dominates(const MatrixRef<Scalar>& kf, const MatrixRef<Scalar>& kh,
                             Scalar ratio = Scalar(10)) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> ef(kf, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eh(kh, Eigen::EigenvaluesOnly);
  return eh.eigenvalues().minCoeff() >= ratio * ef.eigenvalues().maxCoeff();
}

}  // namespace herding
