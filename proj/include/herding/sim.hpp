#pragma once

#include <optional>
#include <string>
#include <vector>

#include "herding/scenario.hpp"
#include "herding/types.hpp"

namespace herding {

// Herder pairs closer than this are reported as a warning (m).
inline constexpr double kHerderSeparationWarning = 0.01;

// Default settling band, as a fraction of the initial error norm.
inline constexpr double kDefaultSettlingBand = 0.05;

// Per-sample residual above which a run is considered to have lost track (m/s).
inline constexpr double kTrackingFailureEta = 0.1;

// Snapshot at t = s * T: positions, controller evaluation at that sample.
struct RunRow {
  double t{0};
  Stacked<double> x;
  Stacked<double> u;
  double error_norm{0};  // |x - x*(t)|
  double eta{0};         // |h| after the controller's solve (explicit: at (x, u))
  int iterations{0};     // LM iterations, 0 for the explicit design
  double tau{0};         // controller wall-clock, s
  double lyapunov{0};    // 0.5 |x_tilde|^2 + 0.5 |h(x, u, t)|^2
  bool herder_saturated{false};
  bool evader_saturated{false};
  bool converged{true};
};

struct RunAggregates {
  double k_mean{0}, k_std{0};
  double eta_mean{0}, eta_std{0};
  double tau_mean{0}, tau_std{0};
  std::optional<double> settling_time;
  double final_error{0};
  int saturated_steps{0};
  int nonconverged_samples{0};
};

struct RunRecord {
  ControllerKind controller{ControllerKind::Implicit};
  std::vector<RunRow> rows;
  RunAggregates aggregates;
  bool aborted{false};
  std::string abort_reason;
  std::vector<std::string> warnings;
};

// p_j <- p_j + T * sat(f_j(x, u_next)), speed clipped per evader at v_max.
Stacked<double> euler_step(const HerdConfig<double>& config, const StackedRef<double>& x,
                           const StackedRef<double>& u_next, double sample_time, double v_max,
                           bool* saturated = nullptr);

// Clips each planar block of a stacked velocity to norm <= v_max.
Stacked<double> saturate_speed(const StackedRef<double>& velocity, double v_max,
                               bool* saturated = nullptr);

// Closed-loop simulation. Collisions or singular systems abort the run; the
// rows produced so far are kept and `aborted` is set.
RunRecord run(const Scenario& scenario, ControllerKind controller);
inline RunRecord run(const Scenario& scenario) { return run(scenario, scenario.controller.kind); }

// First time after which error_norm stays within band * initial error.
// Throws NotSettled when the final sample is still outside the band.
double settling_time(const RunRecord& record, double band = kDefaultSettlingBand);
double settling_time(const std::vector<double>& times, const std::vector<double>& errors,
                     double band = kDefaultSettlingBand);

// Recomputes the aggregates from the rows.
RunAggregates aggregate(const std::vector<RunRow>& rows, double band = kDefaultSettlingBand);

// RMS over rows with t >= from and over evaders of the per-evader position error.
double tracking_rms(const RunRecord& record, const Scenario& scenario, double from);

// Largest per-evader position error in the last row.
double final_max_evader_error(const RunRecord& record, const Scenario& scenario);

}  // namespace herding
