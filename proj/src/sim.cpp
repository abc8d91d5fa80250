#include "herding/sim.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "herding/control_explicit.hpp"
#include "herding/control_implicit.hpp"
#include "herding/diff.hpp"
#include "herding/errors.hpp"
#include "herding/herd_dynamics.hpp"

namespace herding {

namespace {

struct MeanStd {
  double mean{0};
  double std{0};
};

// Sample standard deviation (N - 1); zero for a single sample.
template <typename Get>
MeanStd mean_std(const std::vector<RunRow>& rows, Get get) {
  MeanStd out;
  if (rows.empty()) return out;
  for (const auto& row : rows) out.mean += get(row);
  out.mean /= static_cast<double>(rows.size());
  if (rows.size() < 2) return out;
  double acc = 0;
  for (const auto& row : rows) {
    const double d = get(row) - out.mean;
    acc += d * d;
  }
  out.std = std::sqrt(acc / static_cast<double>(rows.size() - 1));
  return out;
}

double min_herder_separation(const StackedRef<double>& u) {
  double best = std::numeric_limits<double>::infinity();
  const auto n = point_count(u);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      best = std::min(best, (point(u, a) - point(u, b)).norm());
    }
  }
  return best;
}

}  // namespace

Stacked<double> saturate_speed(const StackedRef<double>& velocity, double v_max, bool* saturated) {
  Stacked<double> out = velocity;
  bool any = false;
  for (Eigen::Index i = 0; i < point_count(velocity); ++i) {
    const double speed = point(velocity, i).norm();
    if (speed > v_max) {
      point(out, i) *= v_max / speed;
      any = true;
    }
  }
  if (saturated) *saturated = any;
  return out;
}

Stacked<double> euler_step(const HerdConfig<double>& config, const StackedRef<double>& x,
                           const StackedRef<double>& u_next, double sample_time, double v_max,
                           bool* saturated) {
  const Stacked<double> velocity = stacked_dynamics<double>(config, x, u_next);
  return x + sample_time * saturate_speed(velocity, v_max, saturated);
}

RunRecord run(const Scenario& scenario, ControllerKind controller) {
  validate(scenario);
  const auto& herd = scenario.herd;
  const auto& sim = scenario.sim;
  const DesiredDynamics<double> dd = desired_dynamics_of(scenario);
  const ExplicitGains<double> gains{scenario.controller.residual_gain, scenario.controller.damping, {}};
  const FiniteDiffSettings<double> fd{};

  RunRecord record;
  record.controller = controller;
  if (!residual_gain_dominates<double>(scenario.controller.state_gain, scenario.controller.residual_gain)) {
    record.warnings.emplace_back("K_h is not much larger than K_f; residual may converge slowly");
  }

  const auto steps = static_cast<long>(std::floor(sim.duration / sim.sample_time + 1e-9));
  record.rows.reserve(static_cast<std::size_t>(steps) + 1);

  Stacked<double> x = scenario.x0;
  Stacked<double> u = scenario.u0;
  bool separation_warned = false;

  try {
    for (long s = 0; s <= steps; ++s) {
      RunRow row;
      row.t = static_cast<double>(s) * sim.sample_time;
      row.x = x;
      row.u = u;

      const auto ref = reference_at(dd.reference, row.t);
      const Stacked<double> x_tilde = x - ref.position;
      const Stacked<double> h = residual_h<double>(herd, dd, x, u, row.t);
      row.error_norm = x_tilde.norm();
      row.lyapunov = 0.5 * x_tilde.squaredNorm() + 0.5 * h.squaredNorm();

      if (!separation_warned && herd.herders > 1 && min_herder_separation(u) < kHerderSeparationWarning) {
        std::ostringstream msg;
        msg << "herders closer than " << kHerderSeparationWarning << " m at t = " << row.t;
        record.warnings.push_back(msg.str());
        separation_warned = true;
      }

      Stacked<double> u_next;
      const auto started = std::chrono::steady_clock::now();
      if (controller == ControllerKind::Implicit) {
        const auto solved = lm_solve<double>(herd, dd, x, u, row.t, scenario.controller.lm, fd);
        row.tau = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        row.iterations = solved.iterations;
        row.eta = solved.eta;
        row.converged = solved.converged;
        u_next = implicit_step<double>(u, solved.u, sim.v_max, sim.sample_time, &row.herder_saturated);
      } else {
        const Stacked<double> u_dot = action_derivative<double>(herd, dd, gains, x, u, row.t);
        row.tau = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        row.eta = h.norm();
        u_next = u + sim.sample_time * saturate_speed(u_dot, sim.v_max, &row.herder_saturated);
      }
      record.rows.push_back(row);
      if (s == steps) break;

      x = euler_step(herd, x, u_next, sim.sample_time, sim.v_max, &record.rows.back().evader_saturated);
      u = std::move(u_next);
    }
  } catch (const CollisionSingularity& e) {
    record.aborted = true;
    record.abort_reason = std::string("collision singularity: ") + e.what();
  } catch (const SingularSystem& e) {
    record.aborted = true;
    record.abort_reason = std::string("singular system: ") + e.what();
  }

  record.aggregates = aggregate(record.rows);
  return record;
}

double settling_time(const std::vector<double>& times, const std::vector<double>& errors, double band) {
  if (times.empty() || times.size() != errors.size()) {
    throw DimensionMismatch("settling_time needs equally sized, nonempty series");
  }
  const double limit = band * errors.front();
  std::size_t first_inside = errors.size();
  for (std::size_t i = errors.size(); i-- > 0;) {
    if (errors[i] > limit) break;
    first_inside = i;
  }
  if (first_inside == errors.size()) throw NotSettled("error never stays within the settling band");
  return times[first_inside];
}

double settling_time(const RunRecord& record, double band) {
  std::vector<double> times, errors;
  times.reserve(record.rows.size());
  errors.reserve(record.rows.size());
  for (const auto& row : record.rows) {
    times.push_back(row.t);
    errors.push_back(row.error_norm);
  }
  return settling_time(times, errors, band);
}

RunAggregates aggregate(const std::vector<RunRow>& rows, double band) {
  RunAggregates agg;
  if (rows.empty()) return agg;
  const auto k = mean_std(rows, [](const RunRow& r) { return static_cast<double>(r.iterations); });
  const auto eta = mean_std(rows, [](const RunRow& r) { return r.eta; });
  const auto tau = mean_std(rows, [](const RunRow& r) { return r.tau; });
  agg.k_mean = k.mean;
  agg.k_std = k.std;
  agg.eta_mean = eta.mean;
  agg.eta_std = eta.std;
  agg.tau_mean = tau.mean;
  agg.tau_std = tau.std;
  agg.final_error = rows.back().error_norm;
  for (const auto& row : rows) {
    if (row.herder_saturated || row.evader_saturated) ++agg.saturated_steps;
    if (!row.converged) ++agg.nonconverged_samples;
  }
  std::vector<double> times, errors;
  for (const auto& row : rows) {
    times.push_back(row.t);
    errors.push_back(row.error_norm);
  }
  try {
    agg.settling_time = settling_time(times, errors, band);
  } catch (const NotSettled&) {
    agg.settling_time.reset();
  }
  return agg;
}

double tracking_rms(const RunRecord& record, const Scenario& scenario, double from) {
  double acc = 0;
  std::size_t count = 0;
  for (const auto& row : record.rows) {
    if (row.t < from) continue;
    const auto ref = reference_at(scenario.reference, row.t);
    for (Eigen::Index j = 0; j < point_count(row.x); ++j) {
      acc += (point(row.x, j) - point(ref.position, j)).squaredNorm();
      ++count;
    }
  }
  if (count == 0) throw DimensionMismatch("no rows at or after the requested time");
  return std::sqrt(acc / static_cast<double>(count));
}

double final_max_evader_error(const RunRecord& record, const Scenario& scenario) {
  if (record.rows.empty()) throw DimensionMismatch("empty run record");
  const auto& row = record.rows.back();
  const auto ref = reference_at(scenario.reference, row.t);
  double worst = 0;
  for (Eigen::Index j = 0; j < point_count(row.x); ++j) {
    worst = std::max(worst, (point(row.x, j) - point(ref.position, j)).norm());
  }
  return worst;
}

}  // namespace herding
