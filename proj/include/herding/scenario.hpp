#pragma once

#include <string_view>

#include "herding/control_implicit.hpp"
#include "herding/herd_dynamics.hpp"
#include "herding/reference.hpp"
#include "herding/types.hpp"

namespace herding {

enum class ControllerKind { Explicit, Implicit };

std::string_view to_string(ControllerKind kind);
ControllerKind controller_kind_from(std::string_view name);

struct SimSettings {
  double sample_time{0.01};  // T, s
  double duration{20.0};     // s
  double v_max{0.4};         // m/s, shared by herders and evaders

  bool operator==(const SimSettings&) const = default;
};

struct ControllerConfig {
  ControllerKind kind{ControllerKind::Implicit};
  Matrix<double> state_gain;     // K_f
  Matrix<double> residual_gain;  // K_h
  LMConfig<double> lm{};
  bool feedforward{false};
  double damping{0.0};

  friend bool operator==(const ControllerConfig& a, const ControllerConfig& b) {
    return a.kind == b.kind && same_values(a.state_gain, b.state_gain) &&
           same_values(a.residual_gain, b.residual_gain) && a.lm == b.lm &&
           a.feedforward == b.feedforward && a.damping == b.damping;
  }
};

struct Scenario {
  HerdConfig<double> herd;
  Stacked<double> x0;
  Stacked<double> u0;
  ReferenceSpec<double> reference;
  SimSettings sim;
  ControllerConfig controller;

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.herd == b.herd && same_values(a.x0, b.x0) && same_values(a.u0, b.u0) &&
           a.reference == b.reference && a.sim == b.sim && a.controller == b.controller;
  }
};

// Checks every cross-field and per-model invariant; throws InvariantViolation
// naming the offending field.
void validate(const Scenario& scenario);

DesiredDynamics<double> desired_dynamics_of(const Scenario& scenario);

}  // namespace herding
