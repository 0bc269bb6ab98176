#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crowdnav/cli.hpp"
#include "crowdnav/config.hpp"
#include "crowdnav/report.hpp"

using namespace crowdnav;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("crowdnav_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> sorted_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::sort(lines.begin(), lines.end());
  return lines;
}

/// A short synthetic benchmark config.
std::string small_config(const fs::path& out) {
  RunConfig c;
  c.crowd.groups_min = 2;
  c.crowd.groups_max = 3;
  c.seeds.count = 3;
  c.output_dir = out.string();
  return config_to_json(c);
}

std::string csv_with(const std::string& method, const std::vector<double>& min_dist, std::uint64_t first_seed = 0) {
  std::ostringstream o;
  o << kCsvHeader << '\n';
  for (std::size_t i = 0; i < min_dist.size(); ++i) {
    o << method << ",cross,online,perfect," << first_seed + i << ",reached," << min_dist[i] << ",14.000000,nan\n";
  }
  return o.str();
}

}  // namespace

TEST_CASE("run: minimal config with an empty crowd succeeds") {
  const auto dir = scratch("run");
  const auto cfg = write_file(dir / "c.json", R"({"crowd": {"source": "none"}, "output_dir": ")" +
                                                   (dir / "out").string() + "\"}");
  const auto r = cli({"run", cfg});
  CHECK(r.code == kExitOk);
  CHECK(r.err.empty());
  CHECK(r.out.find("outcome reached") != std::string::npos);
  CHECK(r.out.find("t=1.0 s") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "trial.json"));
  CHECK(fs::exists(dir / "out" / "trial.csv"));
  CHECK(fs::exists(dir / "out" / "trial.svg"));
}

TEST_CASE("config errors exit 2 and name the key") {
  const auto dir = scratch("config");
  auto r = cli({"run", write_file(dir / "a.json", R"({"mpc": {"horizn": 8}})")});
  CHECK(r.code == kExitConfig);
  CHECK(r.out.empty());
  CHECK(r.err.find("mpc.horizn") != std::string::npos);

  r = cli({"run", write_file(dir / "b.json", R"({"scenario": {"mode": "offline"}, "crowd": {"source": "dataset"}})")});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("crowd.dataset_path") != std::string::npos);

  r = cli({"run", write_file(dir / "c.json", R"({"crowd": {"source": "dataset", "dataset_path": "/nonexistent"}})")});
  CHECK(r.code == kExitConfig);

  r = cli({"run", write_file(dir / "d.json", R"({"mpc": {"gamma": "high"}})")});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("mpc.gamma") != std::string::npos);

  r = cli({"run", write_file(dir / "e.json", "{ not json")});
  CHECK(r.code == kExitConfig);

  r = cli({"run", (dir / "missing.json").string()});
  CHECK(r.code == kExitConfig);

  r = cli({"frobnicate"});
  CHECK(r.code == kExitConfig);
  CHECK(r.out.empty());
}

TEST_CASE("config round trip") {
  RunConfig c;
  c.scenario.task = Task::flow;
  c.scenario.method = parse_method("group-hull-nopred");
  place_robot(c.scenario);
  c.pipeline.mpc.gamma = 0.85;
  c.pipeline.grouping.egg.front_gain = 0.55;
  c.crowd.synthetic.stationary = true;
  c.seeds.base = 18446744073709551615ULL;
  const std::string text = config_to_json(c);
  const RunConfig back = parse_config(text);
  CHECK(config_to_json(back) == text);
  CHECK(nlohmann::json::parse(text) == nlohmann::json::parse(config_to_json(back)));
  CHECK(back.seeds.base == c.seeds.base);
  CHECK(back.scenario.robot_start == c.scenario.robot_start);

  // Key order does not matter.
  auto j = nlohmann::json::parse(text);
  nlohmann::json reordered = nlohmann::json::object();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  std::reverse(keys.begin(), keys.end());
  for (const auto& k : keys) reordered[k] = j[k];
  CHECK(config_to_json(parse_config(reordered.dump())) == text);
}

TEST_CASE("bench: methods x trials rows, parallel equals sequential") {
  const auto dir = scratch("bench");
  const auto cfg = write_file(dir / "c.json", small_config(dir / "seq"));
  const auto seq = cli({"bench", cfg, "--methods", "group-edge-linear,ped-linear", "--trials", "3"});
  REQUIRE(seq.code == kExitOk);
  CHECK(seq.err.empty());
  CHECK(seq.out.find("SR") != std::string::npos);
  const auto csv = read_file(dir / "seq" / "report.csv");
  CHECK(sorted_lines(csv).size() == 7);
  CHECK(fs::exists(dir / "seq" / "report.json"));

  const auto par = cli({"bench", cfg, "--methods", "group-edge-linear,ped-linear", "--trials", "3", "--parallel",
                        "3", "--out", (dir / "par").string()});
  REQUIRE(par.code == kExitOk);
  CHECK(sorted_lines(read_file(dir / "par" / "report.csv")) == sorted_lines(csv));

  const auto bad = cli({"bench", cfg, "--timing", "--parallel"});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("--timing") != std::string::npos);

  CHECK(cli({"bench", cfg, "--methods", "group-blob"}).code == kExitConfig);
}

TEST_CASE("bench honours the output directory variable") {
  const auto dir = scratch("env");
  RunConfig c;
  c.crowd.source = CrowdSource::none;
  c.seeds.count = 1;
  c.output_dir = "";
  const auto cfg = write_file(dir / "c.json", config_to_json(c));
  ::setenv("CROWDNAV_OUTPUT_DIR", (dir / "envout").string().c_str(), 1);
  const auto r = cli({"bench", cfg, "--timing"});
  ::unsetenv("CROWDNAV_OUTPUT_DIR");
  REQUIRE(r.code == kExitOk);
  const auto rows = read_file(dir / "envout" / "report.csv");
  CHECK(rows.find(",nan\n") == std::string::npos);
}

TEST_CASE("compare") {
  const auto dir = scratch("compare");
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(1.6 + 0.05 * ((i * 7) % 11 - 5) / 5.0);
    b.push_back(1.2 + 0.05 * ((i * 5) % 13 - 6) / 6.0);
  }
  const auto pa = write_file(dir / "a.csv", csv_with("group-edge-linear", a));
  const auto pb = write_file(dir / "b.csv", csv_with("ped-linear", b));

  auto r = cli({"compare", pa, pa, "--metric", "min_dist", "--margin", "0.2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("\nequivalent") != std::string::npos);

  r = cli({"compare", pa, pb, "--metric", "min_dist", "--margin", "0.2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("not equivalent") != std::string::npos);

  CHECK(cli({"compare", pa, pb, "--metric", "speed"}).code == kExitConfig);

  const auto shifted = write_file(dir / "c.csv", csv_with("ped-linear", b, 100));
  r = cli({"compare", pa, shifted});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK(r.out.empty());

  CHECK(cli({"compare", pa, (dir / "nothing.csv").string()}).code == kExitConfig);
}

TEST_CASE("render") {
  const auto dir = scratch("render");
  const auto cfg = write_file(dir / "c.json", R"({"crowd": {"source": "none"}, "output_dir": ")" +
                                                   (dir / "out").string() + "\"}");
  REQUIRE(cli({"run", cfg}).code == kExitOk);
  const auto trial = (dir / "out" / "trial.json").string();

  auto r = cli({"render", trial, "--out", (dir / "a.svg").string()});
  CHECK(r.code == kExitOk);
  CHECK(cli({"render", trial, "--out", (dir / "b.svg").string()}).code == kExitOk);
  const auto svg = read_file(dir / "a.svg");
  CHECK(svg == read_file(dir / "b.svg"));
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);

  CHECK(cli({"render", trial, "--out", (dir / "c.svg").string(), "--frame", "0"}).code == kExitOk);
  r = cli({"render", trial, "--out", (dir / "d.svg").string(), "--frame", "100000"});
  CHECK(r.code == kExitConfig);
  CHECK(r.out.empty());

  const auto corrupt = write_file(dir / "bad.json", "{\"method\": \"ped-linear\"");
  CHECK(cli({"render", corrupt, "--out", (dir / "e.svg").string()}).code == kExitConfig);
}
