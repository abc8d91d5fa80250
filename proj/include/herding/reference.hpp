#pragma once

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "herding/errors.hpp"
#include "herding/types.hpp"

namespace herding {

template <typename Scalar>
struct StaticReference {
  Stacked<Scalar> target;

  friend bool operator==(const StaticReference& a, const StaticReference& b) {
    return same_values(a.target, b.target);
  }
};

// Each evader j (1-based) drifts along x at speed[j] while oscillating in y:
//   x*_j(t) = x0*_j + speed_j t
//   y*_j(t) = y0*_j + 0.5 sin(w_j t + 2 pi / j) - 0.5 sin(2 pi / j)
template <typename Scalar>
struct TimeVaryingReference {
  Stacked<Scalar> start;
  std::vector<Scalar> speed;         // m/s
  std::vector<Scalar> angular_rate;  // rad/s

  friend bool operator==(const TimeVaryingReference& a, const TimeVaryingReference& b) {
    return same_values(a.start, b.start) && a.speed == b.speed && a.angular_rate == b.angular_rate;
  }
};

template <typename Scalar>
using ReferenceSpec = std::variant<StaticReference<Scalar>, TimeVaryingReference<Scalar>>;

template <typename Scalar>
struct ReferenceSample {
  Stacked<Scalar> position;
  Stacked<Scalar> velocity;
  Stacked<Scalar> acceleration;
};

template <typename Scalar>
Eigen::Index reference_size(const ReferenceSpec<Scalar>& spec) {
  return std::visit([](const auto& r) -> Eigen::Index {
    using R = std::decay_t<decltype(r)>;
    if constexpr (std::is_same_v<R, StaticReference<Scalar>>) {
      return r.target.size();
    } else {
      return r.start.size();
    }
  }, spec);
}

template <typename Scalar>
bool is_time_varying(const ReferenceSpec<Scalar>& spec) {
  return std::holds_alternative<TimeVaryingReference<Scalar>>(spec);
}

template <typename Scalar>
ReferenceSample<Scalar> reference_at(const ReferenceSpec<Scalar>& spec, Scalar t) {
  if (const auto* fixed = std::get_if<StaticReference<Scalar>>(&spec)) {
    const auto size = fixed->target.size();
    return {fixed->target, Stacked<Scalar>::Zero(size), Stacked<Scalar>::Zero(size)};
  }
  const auto& moving = std::get<TimeVaryingReference<Scalar>>(spec);
  const auto m = point_count(moving.start);
  if (static_cast<Eigen::Index>(moving.speed.size()) != m ||
      static_cast<Eigen::Index>(moving.angular_rate.size()) != m) {
    throw DimensionMismatch("time-varying reference: speed/angular_rate length must equal evader count");
  }
  ReferenceSample<Scalar> sample{moving.start, Stacked<Scalar>::Zero(2 * m),
                                 Stacked<Scalar>::Zero(2 * m)};
  using std::cos;
  using std::sin;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Scalar v = moving.speed[j];
    const Scalar w = moving.angular_rate[j];
    const Scalar phase = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(j + 1);
    sample.position(2 * j) += v * t;
    sample.position(2 * j + 1) += Scalar(0.5) * sin(w * t + phase) - Scalar(0.5) * sin(phase);
    sample.velocity(2 * j) = v;
    sample.velocity(2 * j + 1) = Scalar(0.5) * w * cos(w * t + phase);
    sample.acceleration(2 * j + 1) = -Scalar(0.5) * w * w * sin(w * t + phase);
  }
  return sample;
}

}  // namespace herding
