#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "herding/scenario.hpp"
#include "herding/sim.hpp"

namespace herding {

// Scenario document (JSON). Units: positions m, gains 1/s, T and duration s,
// v_max m/s, gamma 1/(s m), alpha 1/s, r m. Gains may be a scalar (scalar * I)
// or a full 2m x 2m matrix. Throws SchemaError or InvariantViolation.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical document; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

// Gain given as a scalar or a nested list, expanded to size x size.
Matrix<double> parse_gain(std::string_view text, Eigen::Index size, const std::string& field);

std::string describe_models(const HerdConfig<double>& herd);

struct RunFiles {
  std::filesystem::path trajectory;
  std::filesystem::path summary;
};

// Writes trajectory.csv and summary.json into `dir` (created if needed).
RunFiles write_run(const RunRecord& record, const std::filesystem::path& dir);

std::string trajectory_csv(const RunRecord& record);
std::string summary_json(const RunRecord& record);

// Column-oriented view of a trajectory.csv.
struct TrajectoryTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::string_view name) const;
};

TrajectoryTable read_trajectory(const std::filesystem::path& path);

// Same double formatting used in every output file (17 significant digits).
std::string format_double(double value);

}  // namespace herding
