#include "herding/scenario.hpp"

#include <string>

#include <Eigen/Cholesky>

#include "herding/errors.hpp"

namespace herding {

std::string_view to_string(ControllerKind kind) {
  return kind == ControllerKind::Explicit ? "explicit" : "implicit";
}

ControllerKind controller_kind_from(std::string_view name) {
  if (name == "explicit") return ControllerKind::Explicit;
  if (name == "implicit") return ControllerKind::Implicit;
  throw InvariantViolation("controller.type", "expected 'explicit' or 'implicit', got '" +
                                                  std::string(name) + "'");
}

namespace {

void require_finite(const Stacked<double>& v, const std::string& field) {
  if (!v.allFinite()) throw InvariantViolation(field, "entries must be finite");
}

void require_spd(const Matrix<double>& gain, Eigen::Index size, const std::string& field) {
  if (gain.rows() != size || gain.cols() != size) {
    throw InvariantViolation(field, "must be " + std::to_string(size) + "x" + std::to_string(size));
  }
  if (!gain.allFinite()) throw InvariantViolation(field, "entries must be finite");
  if ((gain - gain.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, gain.cwiseAbs().maxCoeff())) {
    throw InvariantViolation(field, "must be symmetric");
  }
  Eigen::LLT<Matrix<double>> llt(gain);
  if (llt.info() != Eigen::Success) throw InvariantViolation(field, "must be positive definite");
}

}  // namespace

void validate(const Scenario& s) {
  validate(s.herd);
  const Eigen::Index m = s.herd.evaders();
  const Eigen::Index n = s.herd.herders;

  if (s.x0.size() != 2 * m) {
    throw InvariantViolation("x0", "expected " + std::to_string(m) + " evader positions");
  }
  require_finite(s.x0, "x0");
  if (s.u0.size() != 2 * n) {
    throw InvariantViolation("u0", "expected " + std::to_string(n) + " herder positions");
  }
  require_finite(s.u0, "u0");

  if (const auto* fixed = std::get_if<StaticReference<double>>(&s.reference)) {
    if (fixed->target.size() != 2 * m) {
      throw InvariantViolation("reference.x_star", "expected " + std::to_string(m) + " targets");
    }
    require_finite(fixed->target, "reference.x_star");
  } else {
    const auto& moving = std::get<TimeVaryingReference<double>>(s.reference);
    if (moving.start.size() != 2 * m) {
      throw InvariantViolation("reference.x0_star", "expected " + std::to_string(m) + " targets");
    }
    require_finite(moving.start, "reference.x0_star");
    if (static_cast<Eigen::Index>(moving.speed.size()) != m) {
      throw InvariantViolation("reference.v_star", "expected " + std::to_string(m) + " entries");
    }
    if (static_cast<Eigen::Index>(moving.angular_rate.size()) != m) {
      throw InvariantViolation("reference.w_star", "expected " + std::to_string(m) + " entries");
    }
    for (double v : moving.speed) {
      if (!std::isfinite(v)) throw InvariantViolation("reference.v_star", "entries must be finite");
    }
    for (double w : moving.angular_rate) {
      if (!std::isfinite(w)) throw InvariantViolation("reference.w_star", "entries must be finite");
    }
  }

  if (!(s.sim.sample_time > 0) || !std::isfinite(s.sim.sample_time)) {
    throw InvariantViolation("sim.T", "must be > 0");
  }
  if (!(s.sim.duration >= 0) || !std::isfinite(s.sim.duration)) {
    throw InvariantViolation("sim.duration", "must be >= 0");
  }
  if (!(s.sim.v_max > 0) || !std::isfinite(s.sim.v_max)) {
    throw InvariantViolation("sim.v_max", "must be > 0");
  }

  require_spd(s.controller.state_gain, 2 * m, "controller.K_f");
  require_spd(s.controller.residual_gain, 2 * m, "controller.K_h");
  validate(s.controller.lm);
  if (!(s.controller.damping >= 0)) throw InvariantViolation("controller.damping", "must be >= 0");
}

DesiredDynamics<double> desired_dynamics_of(const Scenario& scenario) {
  return {scenario.controller.state_gain, scenario.reference, scenario.controller.feedforward};
}

}  // namespace herding
