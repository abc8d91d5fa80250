#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "herding/errors.hpp"
#include "herding/reference.hpp"
#include "herding/types.hpp"

namespace herding {

// Herder-evader separation below which the repulsive field is treated as
// singular (m).
inline constexpr double kCollisionDistance = 1e-6;

// Inverse-cube repulsion: p_dot = gamma * sum_i d_i / |d_i|^3.
template <typename Scalar>
struct InverseModel {
  Scalar gamma{1};

  bool operator==(const InverseModel&) const = default;
};

// Gaussian-weighted repulsion, chi_i = |d_i|^2 / sigma^2. A herder within
// `radius` scares the evader, its term is alpha * d_i * exp(-chi_i); farther
// herders contribute beta * alpha * d_i * exp(-chi_i). The switch is tested
// per herder-evader pair.
template <typename Scalar>
struct ExponentialModel {
  Scalar alpha{0.6};
  Scalar beta{0.5};
  Scalar sigma{2};
  Scalar radius{1};

  bool operator==(const ExponentialModel&) const = default;
};

template <typename Scalar>
using EvaderModel = std::variant<InverseModel<Scalar>, ExponentialModel<Scalar>>;

template <typename Scalar>
void validate(const EvaderModel<Scalar>& model, const std::string& field = "model") {
  std::visit([&](const auto& mdl) {
    using M = std::decay_t<decltype(mdl)>;
    if constexpr (std::is_same_v<M, InverseModel<Scalar>>) {
      if (!(mdl.gamma > 0)) throw InvariantViolation(field + ".gamma", "must be > 0");
    } else {
      if (!(mdl.alpha > 0)) throw InvariantViolation(field + ".alpha", "must be > 0");
      if (!(mdl.beta > 0 && mdl.beta < 1)) throw InvariantViolation(field + ".beta", "must lie in (0, 1)");
      if (!(mdl.sigma > 1)) throw InvariantViolation(field + ".sigma", "must be > 1");
      if (!(mdl.radius > 0)) throw InvariantViolation(field + ".r", "must be > 0");
    }
  }, model);
}

// One evader model per evader, plus the size of the herder team.
template <typename Scalar>
struct HerdConfig {
  std::vector<EvaderModel<Scalar>> models;
  Eigen::Index herders{1};

  Eigen::Index evaders() const { return static_cast<Eigen::Index>(models.size()); }

  bool operator==(const HerdConfig&) const = default;
};

template <typename Scalar>
void validate(const HerdConfig<Scalar>& config) {
  if (config.models.empty()) throw InvariantViolation("herd.evaders", "at least one evader required");
  if (config.herders < 1) throw InvariantViolation("herd.herders", "at least one herder required");
  for (std::size_t j = 0; j < config.models.size(); ++j) {
    validate(config.models[j], "herd.evaders[" + std::to_string(j) + "]");
  }
}

// Velocity of an evader at `p` given all herder positions (stacked, 2n).
template <typename Scalar>
Vec2<Scalar> evader_velocity(const EvaderModel<Scalar>& model, const Vec2<Scalar>& p,
                             const StackedRef<Scalar>& herders) {
  if (herders.size() % 2 != 0) throw DimensionMismatch("herder vector must have even length");
  using std::exp;
  using std::sqrt;
  Vec2<Scalar> velocity = Vec2<Scalar>::Zero();
  const Eigen::Index n = point_count(herders);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2<Scalar> d = p - point(herders, i);
    const Scalar dist2 = d.squaredNorm();
    const Scalar dist = sqrt(dist2);
    if (!(dist > Scalar(kCollisionDistance))) {
      throw CollisionSingularity("herder " + std::to_string(i + 1) +
                                 " within collision distance of evader");
    }
    std::visit([&](const auto& mdl) {
      using M = std::decay_t<decltype(mdl)>;
      if constexpr (std::is_same_v<M, InverseModel<Scalar>>) {
        velocity += mdl.gamma * d / (dist2 * dist);
      } else {
        const Scalar chi = dist2 / (mdl.sigma * mdl.sigma);
        const Scalar gain = dist > mdl.radius ? mdl.beta * mdl.alpha : mdl.alpha;
        velocity += gain * exp(-chi) * d;
      }
    }, model);
  }
  return velocity;
}

inline void check_sizes(Eigen::Index evaders, Eigen::Index herders, Eigen::Index x_size,
                        Eigen::Index u_size) {
  if (x_size != 2 * evaders) {
    throw DimensionMismatch("herd state has " + std::to_string(x_size) + " entries, expected " +
                            std::to_string(2 * evaders));
  }
  if (u_size != 2 * herders) {
    throw DimensionMismatch("herder action has " + std::to_string(u_size) + " entries, expected " +
                            std::to_string(2 * herders));
  }
}

// f(x, u): evader velocities stacked in evader order.
template <typename Scalar>
Stacked<Scalar> stacked_dynamics(const HerdConfig<Scalar>& config, const StackedRef<Scalar>& x,
                                 const StackedRef<Scalar>& u) {
  check_sizes(config.evaders(), config.herders, x.size(), u.size());
  Stacked<Scalar> f(x.size());
  for (Eigen::Index j = 0; j < config.evaders(); ++j) {
    point(f, j) = evader_velocity<Scalar>(config.models[j], point(x, j), u);
  }
  return f;
}

// f*(x, t) = -K_f (x - x*(t)) [+ x*_dot(t) when feedforward is enabled].
template <typename Scalar>
struct DesiredDynamics {
  Matrix<Scalar> gain;  // K_f, 2m x 2m, SPD
  ReferenceSpec<Scalar> reference;
  bool feedforward{false};
};

template <typename Scalar>
Stacked<Scalar> desired_dynamics(const DesiredDynamics<Scalar>& dd, const StackedRef<Scalar>& x,
                                 Scalar t) {
  if (dd.gain.rows() != x.size() || dd.gain.cols() != x.size()) {
    throw DimensionMismatch("K_f must be " + std::to_string(x.size()) + "x" + std::to_string(x.size()));
  }
  if (reference_size(dd.reference) != x.size()) {
    throw DimensionMismatch("reference size does not match herd state");
  }
  const auto ref = reference_at(dd.reference, t);
  Stacked<Scalar> out = -dd.gain * (x - ref.position);
  if (dd.feedforward) out += ref.velocity;
  return out;
}

// Partial derivative of f* with respect to t at fixed x.
template <typename Scalar>
Stacked<Scalar> desired_dynamics_rate(const DesiredDynamics<Scalar>& dd, Scalar t) {
  const auto ref = reference_at(dd.reference, t);
  Stacked<Scalar> out = dd.gain * ref.velocity;
  if (dd.feedforward) out += ref.acceleration;
  return out;
}

// h(x, u, t) = f(x, u) - f*(x, t). The control action is a root of h in u.
template <typename Scalar>
Stacked<Scalar> residual_h(const HerdConfig<Scalar>& config, const DesiredDynamics<Scalar>& dd,
                           const StackedRef<Scalar>& x, const StackedRef<Scalar>& u, Scalar t) {
  return stacked_dynamics(config, x, u) - desired_dynamics(dd, x, t);
}

// Target dynamics for the residual: h* = -K_h h.
template <typename Scalar>
Stacked<Scalar> h_star(const MatrixRef<Scalar>& gain, const StackedRef<Scalar>& h) {
  if (gain.rows() != h.size() || gain.cols() != h.size()) {
    throw DimensionMismatch("K_h must match residual size");
  }
  return -gain * h;
}

template <typename Scalar>
Matrix<Scalar> scaled_identity(Eigen::Index size, Scalar value) {
  return value * Matrix<Scalar>::Identity(size, size);
}

}  // namespace herding
