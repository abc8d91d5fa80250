#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "herding/diff.hpp"
#include "herding/errors.hpp"
#include "herding/herd_dynamics.hpp"
#include "herding/types.hpp"

namespace herding {

// Hard ceiling on iterations when no k_max is configured, so a solve that
// cannot converge still terminates.
inline constexpr int kUnboundedIterationCap = 100000;

// Halvings attempted when an LM step lands on a collision or raises |h|.
inline constexpr int kBacktracks = 10;

template <typename Scalar>
struct LMConfig {
  Scalar lambda{0.1};
  Scalar epsilon{1e-3};               // m, stop once |zeta| < epsilon
  std::optional<int> max_iterations{20};  // nullopt: unbounded

  bool operator==(const LMConfig&) const = default;
};

template <typename Scalar>
void validate(const LMConfig<Scalar>& lm) {
  if (!(lm.lambda >= 0)) throw InvariantViolation("controller.lm.lambda", "must be >= 0");
  if (!(lm.epsilon > 0)) throw InvariantViolation("controller.lm.epsilon", "must be > 0");
  if (lm.max_iterations && *lm.max_iterations < 1) {
    throw InvariantViolation("controller.lm.k_max", "must be >= 1");
  }
}

template <typename Scalar>
struct LMResult {
  Stacked<Scalar> u;
  int iterations{0};
  Scalar eta{0};             // |h| at the returned action
  Scalar last_step_norm{0};  // |zeta| of the final iteration
  bool converged{false};
};

// Levenberg-Marquardt on a generic residual:
//   u_k = u_{k-1} - (J^T J + lambda I)^{-1} J^T r(u_{k-1})
// with J re-evaluated each iteration. A step that collides or increases |r|
// is halved, up to kBacktracks times (a collision after that propagates).
// Convergence is judged on the full step. If the iteration limit is hit, the
// iterate with the smallest residual is returned.
template <typename Scalar, typename ResidualFn, typename JacobianFn>
LMResult<Scalar> levenberg_marquardt(ResidualFn&& residual, JacobianFn&& jacobian,
                                     const StackedRef<Scalar>& start, const LMConfig<Scalar>& lm) {
  const int limit = lm.max_iterations.value_or(kUnboundedIterationCap);

  LMResult<Scalar> out;
  Stacked<Scalar> u = start;
  Stacked<Scalar> r = residual(u);
  Stacked<Scalar> best_u = u;
  Scalar best_norm = r.norm();

  for (int k = 1; k <= limit; ++k) {
    const Matrix<Scalar> jac = jacobian(u);
    Matrix<Scalar> normal = jac.transpose() * jac;
    normal.diagonal().array() += lm.lambda;
    Eigen::LDLT<Matrix<Scalar>> ldlt(normal);
    const bool undamped = !(lm.lambda > 0);
    if (ldlt.info() != Eigen::Success ||
        (undamped && !(ldlt.rcond() > Scalar(kSingularRcond)))) {
      throw SingularSystem("LM normal matrix is numerically singular");
    }
    Stacked<Scalar> step = -ldlt.solve(jac.transpose() * r);
    const Scalar proposed = step.norm();

    Stacked<Scalar> next;
    Stacked<Scalar> next_r;
    const Scalar current = r.norm();
    for (int attempt = 0;; ++attempt) {
      next = u + step;
      try {
        next_r = residual(next);
      } catch (const CollisionSingularity&) {
        if (attempt == kBacktracks) throw;
        step *= Scalar(0.5);
        continue;
      }
      if (next_r.norm() <= current || attempt == kBacktracks) break;
      step *= Scalar(0.5);
    }

    u = std::move(next);
    r = std::move(next_r);
    out.iterations = k;
    out.last_step_norm = step.norm();
    const Scalar norm = r.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best_u = u;
    }
    if (proposed < lm.epsilon) {
      out.converged = true;
      break;
    }
  }

  if (out.converged || out.iterations == 0) {
    out.u = std::move(u);
    out.eta = r.norm();
  } else {
    out.u = std::move(best_u);
    out.eta = best_norm;
  }
  return out;
}

// Root of h(x, ., t) starting from u_start (warm start from the previous action).
template <typename Scalar>
LMResult<Scalar> lm_solve(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                          const StackedRef<Scalar>& x, const StackedRef<Scalar>& u_start, Scalar t,
                          const LMConfig<Scalar>& lm, const FiniteDiffSettings<Scalar>& fd = {}) {
  return levenberg_marquardt<Scalar>(
      [&](const Stacked<Scalar>& u) { return residual_h<Scalar>(config, dd, x, u, t); },
      [&](const Stacked<Scalar>& u) { return jacobian_u<Scalar>(config, dd, x, u, t, fd); },
      u_start, lm);
}

// Moves each herder from `previous` toward `solved` by at most v_max * T.
// Returns the applied action.
template <typename Scalar>
Stacked<Scalar> implicit_step(const StackedRef<Scalar>& previous, const StackedRef<Scalar>& solved,
                              Scalar v_max, Scalar sample_time, bool* clipped = nullptr) {
  if (previous.size() != solved.size()) throw DimensionMismatch("action sizes differ");
  const Scalar reach = v_max * sample_time;
  Stacked<Scalar> applied = solved;
  bool any = false;
  for (Eigen::Index i = 0; i < point_count(previous); ++i) {
    const Vec2<Scalar> delta = point(solved, i) - point(previous, i);
    const Scalar dist = delta.norm();
    if (dist > reach) {
      point(applied, i) = point(previous, i) + delta * (reach / dist);
      any = true;
    }
  }
  if (clipped) *clipped = any;
  return applied;
}

}  // namespace herding
