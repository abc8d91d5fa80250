#include "herding/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "herding/errors.hpp"

namespace herding {

using json = nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw SchemaError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw SchemaError(field, "required field missing");
  return *it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.contains(key)) throw SchemaError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

double number(const json& value, const std::string& field) {
  if (!value.is_number()) throw SchemaError(field, "expected a number");
  return value.get<double>();
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
  return number(require(obj, key, path), path + "." + key);
}

std::vector<double> number_list(const json& value, const std::string& field) {
  if (!value.is_array()) throw SchemaError(field, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(number(value[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// [[x, y], ...] -> stacked vector
Stacked<double> points(const json& value, const std::string& field) {
  if (!value.is_array() || value.empty()) throw SchemaError(field, "expected a nonempty list of [x, y] pairs");
  Stacked<double> out(2 * static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string item = field + "[" + std::to_string(i) + "]";
    const auto pair = number_list(value[i], item);
    if (pair.size() != 2) throw SchemaError(item, "expected [x, y]");
    out(2 * static_cast<Eigen::Index>(i)) = pair[0];
    out(2 * static_cast<Eigen::Index>(i) + 1) = pair[1];
  }
  return out;
}

json points_json(const Stacked<double>& stacked) {
  json out = json::array();
  for (Eigen::Index i = 0; i < point_count(stacked); ++i) out.push_back({stacked(2 * i), stacked(2 * i + 1)});
  return out;
}

Matrix<double> gain(const json& value, Eigen::Index size, const std::string& field) {
  if (value.is_number()) return scaled_identity<double>(size, value.get<double>());
  if (!value.is_array()) throw SchemaError(field, "expected a scalar or a square matrix");
  if (static_cast<Eigen::Index>(value.size()) != size) {
    throw InvariantViolation(field, "matrix must be " + std::to_string(size) + "x" + std::to_string(size));
  }
  Matrix<double> out(size, size);
  for (Eigen::Index r = 0; r < size; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const auto row = number_list(value[static_cast<std::size_t>(r)], row_field);
    if (static_cast<Eigen::Index>(row.size()) != size) {
      throw InvariantViolation(row_field, "expected " + std::to_string(size) + " entries");
    }
    for (Eigen::Index c = 0; c < size; ++c) out(r, c) = row[static_cast<std::size_t>(c)];
  }
  return out;
}

json matrix_json(const Matrix<double>& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

EvaderModel<double> parse_model(const json& value, const std::string& field) {
  if (!value.is_object()) throw SchemaError(field, "expected an object");
  const auto& kind = require(value, "model", field);
  if (!kind.is_string()) throw SchemaError(field + ".model", "expected a string");
  const auto name = kind.get<std::string>();
  if (name == "inverse") {
    reject_unknown(value, {"model", "gamma"}, field);
    return InverseModel<double>{number_at(value, "gamma", field)};
  }
  if (name == "exponential") {
    reject_unknown(value, {"model", "alpha", "beta", "sigma", "r"}, field);
    return ExponentialModel<double>{number_at(value, "alpha", field), number_at(value, "beta", field),
                                    number_at(value, "sigma", field), number_at(value, "r", field)};
  }
  throw SchemaError(field + ".model", "expected 'inverse' or 'exponential'");
}

json model_json(const EvaderModel<double>& model) {
  if (const auto* inv = std::get_if<InverseModel<double>>(&model)) {
    return {{"model", "inverse"}, {"gamma", inv->gamma}};
  }
  const auto& e = std::get<ExponentialModel<double>>(model);
  return {{"model", "exponential"}, {"alpha", e.alpha}, {"beta", e.beta}, {"sigma", e.sigma}, {"r", e.radius}};
}

Scenario from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("<root>", "expected an object");
  reject_unknown(doc, {"description", "herd", "x0", "u0", "reference", "sim", "controller"}, "");

  Scenario s;
  const auto& herd = require(doc, "herd", "");
  reject_unknown(herd, {"herders", "evaders"}, "herd");
  const auto& herders = require(herd, "herders", "herd");
  if (!herders.is_number_integer()) throw SchemaError("herd.herders", "expected an integer");
  s.herd.herders = herders.get<Eigen::Index>();
  const auto& evaders = require(herd, "evaders", "herd");
  if (!evaders.is_array()) throw SchemaError("herd.evaders", "expected a list");
  for (std::size_t j = 0; j < evaders.size(); ++j) {
    s.herd.models.push_back(parse_model(evaders[j], "herd.evaders[" + std::to_string(j) + "]"));
  }
  validate(s.herd);
  const Eigen::Index size = 2 * s.herd.evaders();

  s.x0 = points(require(doc, "x0", ""), "x0");
  s.u0 = points(require(doc, "u0", ""), "u0");

  const auto& ref = require(doc, "reference", "");
  const auto& ref_type = require(ref, "type", "reference");
  if (!ref_type.is_string()) throw SchemaError("reference.type", "expected a string");
  if (ref_type == "static") {
    reject_unknown(ref, {"type", "x_star"}, "reference");
    s.reference = StaticReference<double>{points(require(ref, "x_star", "reference"), "reference.x_star")};
  } else if (ref_type == "time_varying") {
    reject_unknown(ref, {"type", "x0_star", "v_star", "w_star"}, "reference");
    s.reference = TimeVaryingReference<double>{
        points(require(ref, "x0_star", "reference"), "reference.x0_star"),
        number_list(require(ref, "v_star", "reference"), "reference.v_star"),
        number_list(require(ref, "w_star", "reference"), "reference.w_star")};
  } else {
    throw SchemaError("reference.type", "expected 'static' or 'time_varying'");
  }

  const auto& sim = require(doc, "sim", "");
  reject_unknown(sim, {"T", "duration", "v_max"}, "sim");
  s.sim.sample_time = number_at(sim, "T", "sim");
  s.sim.duration = number_at(sim, "duration", "sim");
  s.sim.v_max = number_at(sim, "v_max", "sim");

  const auto& ctl = require(doc, "controller", "");
  reject_unknown(ctl, {"type", "K_f", "K_h", "lm", "feedforward", "damping"}, "controller");
  const auto& type = require(ctl, "type", "controller");
  if (!type.is_string()) throw SchemaError("controller.type", "expected a string");
  s.controller.kind = controller_kind_from(type.get<std::string>());
  s.controller.state_gain = gain(require(ctl, "K_f", "controller"), size, "controller.K_f");
  s.controller.residual_gain = gain(require(ctl, "K_h", "controller"), size, "controller.K_h");
  if (const auto it = ctl.find("lm"); it != ctl.end()) {
    const auto& lm = *it;
    if (!lm.is_object()) throw SchemaError("controller.lm", "expected an object");
    reject_unknown(lm, {"lambda", "epsilon", "k_max"}, "controller.lm");
    if (lm.contains("lambda")) s.controller.lm.lambda = number(lm["lambda"], "controller.lm.lambda");
    if (lm.contains("epsilon")) s.controller.lm.epsilon = number(lm["epsilon"], "controller.lm.epsilon");
    if (lm.contains("k_max")) {
      const auto& k = lm["k_max"];
      if (k.is_null()) {
        s.controller.lm.max_iterations.reset();
      } else if (k.is_number_integer()) {
        s.controller.lm.max_iterations = k.get<int>();
      } else {
        throw SchemaError("controller.lm.k_max", "expected an integer or null (unbounded)");
      }
    }
  }
  if (const auto it = ctl.find("feedforward"); it != ctl.end()) {
    if (!it->is_boolean()) throw SchemaError("controller.feedforward", "expected a boolean");
    s.controller.feedforward = it->get<bool>();
  } else {
    s.controller.feedforward = is_time_varying(s.reference);
  }
  if (const auto it = ctl.find("damping"); it != ctl.end()) {
    s.controller.damping = number(*it, "controller.damping");
  }

  validate(s);
  return s;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", e.what());
  }
  return from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  json evaders = json::array();
  for (const auto& model : s.herd.models) evaders.push_back(model_json(model));
  doc["herd"] = {{"herders", s.herd.herders}, {"evaders", evaders}};
  doc["x0"] = points_json(s.x0);
  doc["u0"] = points_json(s.u0);
  if (const auto* fixed = std::get_if<StaticReference<double>>(&s.reference)) {
    doc["reference"] = {{"type", "static"}, {"x_star", points_json(fixed->target)}};
  } else {
    const auto& moving = std::get<TimeVaryingReference<double>>(s.reference);
    doc["reference"] = {{"type", "time_varying"},
                        {"x0_star", points_json(moving.start)},
                        {"v_star", moving.speed},
                        {"w_star", moving.angular_rate}};
  }
  doc["sim"] = {{"T", s.sim.sample_time}, {"duration", s.sim.duration}, {"v_max", s.sim.v_max}};
  json lm = {{"lambda", s.controller.lm.lambda}, {"epsilon", s.controller.lm.epsilon}};
  lm["k_max"] = s.controller.lm.max_iterations ? json(*s.controller.lm.max_iterations) : json(nullptr);
  doc["controller"] = {{"type", std::string(to_string(s.controller.kind))},
                       {"K_f", matrix_json(s.controller.state_gain)},
                       {"K_h", matrix_json(s.controller.residual_gain)},
                       {"lm", lm},
                       {"feedforward", s.controller.feedforward},
                       {"damping", s.controller.damping}};
  return doc.dump(2);
}

Matrix<double> parse_gain(std::string_view text, Eigen::Index size, const std::string& field) {
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(field, e.what());
  }
  return gain(value, size, field);
}

std::string describe_models(const HerdConfig<double>& herd) {
  bool inverse = false, exponential = false;
  for (const auto& model : herd.models) {
    (std::holds_alternative<InverseModel<double>>(model) ? inverse : exponential) = true;
  }
  if (inverse && exponential) return "mixed";
  return inverse ? "inverse" : "exponential";
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trajectory_csv(const RunRecord& record) {
  std::ostringstream out;
  const Eigen::Index m = record.rows.empty() ? 0 : point_count(record.rows.front().x);
  const Eigen::Index n = record.rows.empty() ? 0 : point_count(record.rows.front().u);
  out << "t";
  for (Eigen::Index j = 1; j <= m; ++j) out << ",px_" << j << ",py_" << j;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",hx_" << i << ",hy_" << i;
  out << ",err,eta,k,tau,V\n";
  for (const auto& row : record.rows) {
    out << format_double(row.t);
    for (Eigen::Index c = 0; c < row.x.size(); ++c) out << ',' << format_double(row.x(c));
    for (Eigen::Index c = 0; c < row.u.size(); ++c) out << ',' << format_double(row.u(c));
    out << ',' << format_double(row.error_norm) << ',' << format_double(row.eta) << ',' << row.iterations
        << ',' << format_double(row.tau) << ',' << format_double(row.lyapunov) << '\n';
  }
  return out.str();
}

std::string summary_json(const RunRecord& record) {
  const auto& agg = record.aggregates;
  json doc;
  doc["controller"] = std::string(to_string(record.controller));
  doc["rows"] = record.rows.size();
  doc["k_mean"] = agg.k_mean;
  doc["k_std"] = agg.k_std;
  doc["eta_mean"] = agg.eta_mean;
  doc["eta_std"] = agg.eta_std;
  doc["tau_mean"] = agg.tau_mean;
  doc["tau_std"] = agg.tau_std;
  doc["settling_time"] = agg.settling_time ? json(*agg.settling_time) : json(nullptr);
  doc["final_error"] = agg.final_error;
  doc["saturated_steps"] = agg.saturated_steps;
  doc["nonconverged_samples"] = agg.nonconverged_samples;
  doc["tracking_failure"] = agg.eta_mean > kTrackingFailureEta;
  doc["aborted"] = record.aborted;
  doc["abort_reason"] = record.abort_reason;
  doc["warnings"] = record.warnings;
  return doc.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

RunFiles write_run(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  RunFiles files{dir / "trajectory.csv", dir / "summary.json"};
  write_file(files.trajectory, trajectory_csv(record));
  write_file(files.summary, summary_json(record));
  return files;
}

std::vector<double> TrajectoryTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& row : rows) out.push_back(row[c]);
      return out;
    }
  }
  throw Error("trajectory has no column '" + std::string(name) + "'");
}

TrajectoryTable read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  TrajectoryTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size()) throw Error(path.string() + ": ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace herding
