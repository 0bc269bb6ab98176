#include "crowdnav/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "crowdnav/config.hpp"
#include "crowdnav/report.hpp"
#include "crowdnav/runner.hpp"
#include "crowdnav/stats.hpp"

namespace crowdnav {

namespace {

/// Bad input of any kind that is not a config file problem.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::filesystem::path output_dir(const RunConfig& config, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CROWDNAV_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

std::vector<Method> parse_methods(const std::string& list, const Method& fallback) {
  if (list.empty()) return {fallback};
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    try {
      out.push_back(parse_method(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--methods", e.what());
    }
  }
  if (out.empty()) throw ConfigError("--methods", "no method given");
  return out;
}

std::string cell(double v, int precision) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

void print_table(std::ostream& out, const AggregateReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %6s %8s %8s %10s %4s\n", "method", "SR", "MinD", "PL", "Time", "n");
  out << line;
  for (const auto& m : report.methods) {
    std::snprintf(line, sizeof line, "%-22s %6s %8s %8s %10s %4zu\n", m.method.c_str(),
                  cell(m.success_rate, 3).c_str(), cell(m.mean_min_dist, 3).c_str(),
                  cell(m.mean_path_length, 3).c_str(), cell(m.mean_step_time, 6).c_str(), m.n_trials);
    out << line;
  }
}

int cmd_run(const std::string& config_path, std::uint64_t* seed, const std::string& out_flag, std::ostream& out) {
  RunConfig config = load_config(config_path);
  if (seed) config.seeds.base = *seed;
  const std::vector<Method> methods{config.scenario.method};
  const auto jobs = plan_jobs(config, methods, 1);
  if (jobs.empty()) throw ConfigError("crowd.dataset_path", "dataset has no qualifying trial start");
  const TrialJob& job = jobs.front();

  PipelineConfig pipeline = config.pipeline;
  pipeline.record_frames = true;
  out << "run " << job.spec.method.name() << " seed " << job.seed << " start " << cell(job.start, 1) << " s\n";
  long last_second = -1;
  const Point2 goal = job.spec.robot_goal;
  auto progress = [&](double t, Point2 p) {
    const long second = static_cast<long>(std::floor(t + 1e-9));
    if (second == last_second) return;
    last_second = second;
    out << "  t=" << cell(t, 1) << " s  robot=(" << cell(p.x, 2) << ", " << cell(p.y, 2)
        << ")  to_goal=" << cell(distance(p, goal), 2) << " m\n"
        << std::flush;
  };
  const TrialResult r = run_trial(job.spec, pipeline, *job.dataset, job.start, job.seed, progress);

  const auto dir = output_dir(config, out_flag);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "trial.json", trial_json(r));
  const AggregateReport report = aggregate({r});
  std::ostringstream csv;
  write_report_csv(csv, report);
  write_text_file(dir / "trial.csv", csv.str());
  write_text_file(dir / "trial.svg", render_svg(r));
  out << "outcome " << to_string(r.outcome) << "  min_dist " << cell(r.min_dist, 3) << " m  path_length "
      << cell(r.path_length, 3) << " m\n"
      << "wrote " << (dir / "trial.json").string() << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& methods_flag, std::size_t trials,
              std::size_t parallel, bool timing, const std::string& out_flag, std::ostream& out) {
  const RunConfig config = load_config(config_path);
  const auto methods = parse_methods(methods_flag, config.scenario.method);
  const std::size_t n = trials > 0 ? trials : config.seeds.count;
  const auto jobs = plan_jobs(config, methods, n);
  if (jobs.empty()) throw ConfigError("crowd.dataset_path", "dataset has no qualifying trial start");

  PipelineConfig pipeline = config.pipeline;
  pipeline.measure_time = timing;
  const auto results = run_jobs(jobs, pipeline, parallel);
  const AggregateReport report = aggregate(results);

  const auto dir = output_dir(config, out_flag);
  export_report(report, ExportFormat::csv, dir);
  export_report(report, ExportFormat::json, dir);
  print_table(out, report);
  out << "wrote " << (dir / "report.csv").string() << " and " << (dir / "report.json").string() << '\n';
  return kExitOk;
}

std::vector<TrialResult> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return read_report_csv(in);
  } catch (const ReportError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::map<std::uint64_t, double> metric_by_seed(const std::vector<TrialResult>& rows, const std::string& method,
                                              const std::string& metric, const std::string& label) {
  std::set<std::string> names;
  for (const auto& r : rows) names.insert(r.method);
  std::string chosen = method;
  if (chosen.empty()) {
    if (names.size() != 1) throw UsageError(label + " holds several methods; pick one with --method-" + label.back());
    chosen = *names.begin();
  }
  std::map<std::uint64_t, double> out;
  for (const auto& r : rows) {
    if (r.method != chosen) continue;
    double v = 0.0;
    if (metric == "min_dist") {
      v = r.min_dist;
    } else if (metric == "path_length") {
      v = r.path_length;
    } else {
      v = r.success ? 1.0 : 0.0;
    }
    if (!out.emplace(r.seed, v).second) throw UsageError(label + ": duplicate seed " + std::to_string(r.seed));
  }
  if (out.empty()) throw UsageError(label + ": no rows for method " + chosen);
  return out;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, const std::string& metric, double margin,
                const std::string& method_a, const std::string& method_b, std::ostream& out) {
  if (metric != "min_dist" && metric != "path_length" && metric != "success") {
    throw UsageError("unknown metric '" + metric + "' (expected min_dist, path_length or success)");
  }
  if (!(margin >= 0.0)) throw UsageError("--margin must be >= 0");
  const auto a = metric_by_seed(read_csv_file(path_a), method_a, metric, "report a");
  const auto b = metric_by_seed(read_csv_file(path_b), method_b, metric, "report b");
  std::vector<double> va, vb;
  for (const auto& [seed, v] : a) {
    const auto it = b.find(seed);
    if (it == b.end()) throw UsageError("seed sets differ: " + std::to_string(seed) + " only in report a");
    va.push_back(v);
    vb.push_back(it->second);
  }
  if (a.size() != b.size()) throw UsageError("seed sets differ: report b has extra seeds");
  TostResult r;
  try {
    r = tost_equivalence(va, vb, margin);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  char line[256];
  std::snprintf(line, sizeof line, "metric %s  n %zu  margin %g\np_lower %.6g  p_upper %.6g  p_tost %.6g\n",
                metric.c_str(), va.size(), margin, r.p_lower, r.p_upper, r.p_tost);
  out << line << (r.equivalent ? "equivalent" : "not equivalent") << " at alpha 0.05\n";
  return kExitOk;
}

int cmd_render(const std::string& trial_path, const std::string& out_path, std::optional<std::size_t> frame,
               std::ostream& out) {
  std::ifstream in(trial_path);
  if (!in) throw UsageError("cannot read " + trial_path);
  std::stringstream ss;
  ss << in.rdbuf();
  TrialResult trial;
  try {
    trial = trial_from_json(ss.str());
  } catch (const ReportError& e) {
    throw UsageError(trial_path + ": " + e.what());
  }
  std::string svg;
  try {
    svg = render_svg(trial, frame);
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
  write_text_file(out_path, svg);
  out << "wrote " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-aware crowd navigation simulator and benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run one trial and write trial.json/csv/svg");
  run->add_option("config", config_path, "config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "trial seed (default: seeds.base)");
  run->add_option("--out", out_flag, "output directory");

  std::string methods;
  std::size_t trials = 0;
  std::size_t parallel = 1;
  bool timing = false;
  auto* bench = app.add_subcommand("bench", "run methods x trials and write report.csv/json");
  bench->add_option("config", config_path, "config file")->required();
  bench->add_option("--methods", methods, "comma-separated methods (default: scenario.method)");
  bench->add_option("--trials", trials, "trials per method (default: seeds.count)");
  auto* parallel_opt = bench->add_option("--parallel", parallel, "worker threads (default: all cores)")
                           ->expected(0, 1);
  bench->add_flag("--timing", timing, "measure per-step time (single-threaded)");
  bench->add_option("--out", out_flag, "output directory");

  std::string report_a, report_b, metric = "min_dist", method_a, method_b;
  double margin = 0.2;
  auto* compare = app.add_subcommand("compare", "TOST equivalence of two reports over shared seeds");
  compare->add_option("report_a", report_a, "csv report")->required();
  compare->add_option("report_b", report_b, "csv report")->required();
  compare->add_option("--metric", metric, "min_dist | path_length | success");
  compare->add_option("--margin", margin, "equivalence margin");
  compare->add_option("--method-a", method_a, "method to take from report a");
  compare->add_option("--method-b", method_b, "method to take from report b");

  std::string trial_path, svg_path;
  std::size_t frame = 0;
  auto* render = app.add_subcommand("render", "render a trial file to SVG");
  render->add_option("trial", trial_path, "trial.json")->required();
  render->add_option("--out", svg_path, "output svg")->required();
  auto* frame_opt = render->add_option("--frame", frame, "frame index (default: last)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seed_opt->count() ? &seed : nullptr, out_flag, out);
    if (*bench) {
      if (parallel_opt->count() && parallel_opt->results().empty()) parallel = 0;
      if (parallel_opt->count() && parallel == 0) parallel = std::max(1u, std::thread::hardware_concurrency());
      if (timing && parallel_opt->count()) {
        throw UsageError("--timing measures single-threaded runs and cannot be combined with --parallel");
      }
      return cmd_bench(config_path, methods, trials, parallel, timing, out_flag, out);
    }
    if (*compare) return cmd_compare(report_a, report_b, metric, margin, method_a, method_b, out);
    if (*render) return cmd_render(trial_path, svg_path, frame_opt->count() ? std::optional(frame) : std::nullopt, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace crowdnav
