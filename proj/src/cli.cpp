#include "herding/cli.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "herding/control_explicit.hpp"
#include "herding/errors.hpp"
#include "herding/scenario_io.hpp"
#include "herding/sim.hpp"

namespace herding::cli {

namespace {

struct RunOptions {
  std::string scenario;
  std::string controller;
  std::string out;
};

struct BenchOptions {
  std::string scenario;
  std::string t_values;
  bool no_kmax{false};
  std::string out;
};

struct GasOptions {
  std::string kf;
  std::string kh;
  long m{0};
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(opts.scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const ControllerKind kind =
      opts.controller.empty() ? scenario.controller.kind : controller_kind_from(opts.controller);

  const RunRecord record = run(scenario, kind);
  try {
    write_run(record, opts.out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  for (const auto& warning : record.warnings) err << "warning: " << warning << '\n';

  const auto& agg = record.aggregates;
  out << "controller: " << to_string(kind) << '\n';
  out << "rows: " << record.rows.size() << '\n';
  out << "settling_time: " << (agg.settling_time ? format_double(*agg.settling_time) : "not_settled") << '\n';
  out << "final_error: " << format_double(agg.final_error) << '\n';
  if (!record.rows.empty()) {
    out << "final_max_evader_error: " << format_double(final_max_evader_error(record, scenario)) << '\n';
  }
  out << "k_mean: " << format_double(agg.k_mean) << '\n';
  out << "eta_mean: " << format_double(agg.eta_mean) << '\n';
  out << "saturated_steps: " << agg.saturated_steps << '\n';
  out << "aborted: " << (record.aborted ? "true" : "false") << '\n';
  out << "out: " << opts.out << '\n';
  if (record.aborted) {
    err << "error: run aborted: " << record.abort_reason << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct BenchRow {
  double sample_time{0};
  RunAggregates aggregates;
  bool aborted{false};
};

int cmd_bench_t(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  Scenario base;
  std::vector<double> t_values;
  try {
    t_values = parse_t_values(opts.t_values);
    base = load_scenario(opts.scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  std::vector<std::future<BenchRow>> jobs;
  for (double t : t_values) {
    Scenario scenario = base;
    scenario.sim.sample_time = t;
    scenario.controller.kind = ControllerKind::Implicit;
    if (opts.no_kmax) scenario.controller.lm.max_iterations.reset();
    jobs.push_back(std::async(std::launch::async, [scenario = std::move(scenario), t] {
      const RunRecord record = run(scenario, ControllerKind::Implicit);
      return BenchRow{t, record.aggregates, record.aborted};
    }));
  }
  std::vector<BenchRow> rows;
  for (auto& job : jobs) rows.push_back(job.get());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BenchRow& a, const BenchRow& b) { return a.sample_time < b.sample_time; });

  const std::string model = describe_models(base.herd);
  std::ostringstream csv;
  csv << "model,T,tau_mean,k_mean,k_std,eta_mean,eta_std,status\n";
  bool any_ok = false;
  for (const auto& row : rows) {
    const auto& a = row.aggregates;
    const char* status = row.aborted ? "failed" : (a.eta_mean > kTrackingFailureEta ? "tracking_failure" : "ok");
    any_ok = any_ok || !row.aborted;
    csv << model << ',' << format_double(row.sample_time) << ',' << format_double(a.tau_mean) << ','
        << format_double(a.k_mean) << ',' << format_double(a.k_std) << ',' << format_double(a.eta_mean) << ','
        << format_double(a.eta_std) << ',' << status << '\n';
    out << "T: " << format_double(row.sample_time) << " k_mean: " << format_double(a.k_mean)
        << " eta_mean: " << format_double(a.eta_mean) << " tau_mean: " << format_double(a.tau_mean)
        << " status: " << status << '\n';
  }

  try {
    std::filesystem::create_directories(opts.out);
    const auto path = std::filesystem::path(opts.out) / "bench.csv";
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot open " + path.string() + " for writing");
    file << csv.str();
    out << "bench: " << path.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return any_ok ? kExitOk : kExitRuntime;
}

// A gain SPEC is a scalar (scalar * I) or the path of a JSON file holding a matrix.
Matrix<double> load_gain(const std::string& spec, Eigen::Index size, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double value = std::stod(spec, &used);
    if (used == spec.size()) return scaled_identity<double>(size, value);
  } catch (const std::logic_error&) {
  }
  std::ifstream in(spec);
  if (!in) throw SchemaError(flag, "not a number and not a readable matrix file: " + spec);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_gain(buffer.str(), size, flag);
}

int cmd_gas_check(const GasOptions& opts, std::ostream& out, std::ostream& err) {
  GasCheck<double> result;
  try {
    if (opts.m < 1) throw InvariantViolation("--m", "must be >= 1");
    const Eigen::Index size = 2 * static_cast<Eigen::Index>(opts.m);
    const Matrix<double> kf = load_gain(opts.kf, size, "--kf");
    const Matrix<double> kh = load_gain(opts.kh, size, "--kh");
    result = gas_condition<double>(kf, kh);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  out << "negative_definite: " << (result.negative_definite ? "true" : "false") << '\n';
  out << "max_eigenvalue: " << format_double(result.max_eigenvalue) << '\n';
  return result.negative_definite ? kExitOk : kExitValidation;
}

}  // namespace

std::vector<double> parse_t_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != item.size()) throw SchemaError("--t-values", "not a number: '" + item + "'");
    if (!(value > 0)) throw InvariantViolation("--t-values", "every T must be > 0");
    values.push_back(value);
  }
  if (values.empty()) throw SchemaError("--t-values", "at least one sample time required");
  return values;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Herding of non-cooperative evaders by implicit control"};
  app.name(args.empty() ? "herding" : args.front());
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write trajectory.csv and summary.json");
  run_cmd->add_option("--scenario", run_opts.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--controller", run_opts.controller, "explicit or implicit (default: scenario's)")
      ->check(CLI::IsMember({"explicit", "implicit"}));
  run_cmd->add_option("--out", run_opts.out, "Output directory")->required();

  BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench-t", "Implicit-design runs over a list of sample times");
  bench_cmd->add_option("--scenario", bench_opts.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--t-values", bench_opts.t_values, "Comma separated sample times in s, e.g. 0.01,0.1,0.5")
      ->required();
  bench_cmd->add_flag("--no-kmax", bench_opts.no_kmax, "Remove the LM iteration limit");
  bench_cmd->add_option("--out", bench_opts.out, "Output directory for bench.csv")->required();

  GasOptions gas_opts;
  auto* gas_cmd = app.add_subcommand("gas-check", "Check negative definiteness of the composite gain matrix");
  gas_cmd->add_option("--kf", gas_opts.kf, "K_f: scalar or JSON matrix file")->required();
  gas_cmd->add_option("--kh", gas_opts.kh, "K_h: scalar or JSON matrix file")->required();
  gas_cmd->add_option("--m", gas_opts.m, "Number of evaders")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, out, err);
    if (*bench_cmd) return cmd_bench_t(bench_opts, out, err);
    return cmd_gas_check(gas_opts, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace herding::cli
