#include "crowdnav/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace crowdnav {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// One JSON object being consumed; keys never read are reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), join(path_, key));
  }

  void read(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(join(path_, key), "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void read_u64(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(join(path_, key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
      out = v->get<int>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, Point2& out) {
    if (const json* v = take(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(join(path_, key), "expected [x, y]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  /// Reads a string and maps it through `parse`, reporting failures on `key`.
  template <class T, class F>
  void read_enum(const std::string& key, T& out, F parse) {
    std::string s;
    if (!has(key)) return;
    read(key, s);
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(path_, key), e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json* take(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

CrowdSource parse_source(const std::string& s) {
  if (s == "none") return CrowdSource::none;
  if (s == "synthetic") return CrowdSource::synthetic;
  if (s == "dataset") return CrowdSource::dataset;
  throw std::invalid_argument("unknown crowd source '" + s + "'");
}

DriveMode parse_drive(const std::string& s) {
  if (s == "holonomic") return DriveMode::holonomic;
  if (s == "nonholonomic") return DriveMode::nonholonomic;
  throw std::invalid_argument("unknown drive mode '" + s + "'");
}

template <class F>
void check(const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

}  // namespace

std::string to_string(CrowdSource source) {
  switch (source) {
    case CrowdSource::none: return "none";
    case CrowdSource::synthetic: return "synthetic";
    case CrowdSource::dataset: return "dataset";
  }
  return "?";
}

void RunConfig::validate() const {
  check("scenario", [&] { scenario.validate(); });
  check("mpc", [&] { pipeline.mpc.validate(); });
  check("grouping", [&] { pipeline.grouping.validate(); });
  check("prediction", [&] { pipeline.prediction.validate(); });
  check("lidar", [&] { pipeline.lidar.validate(); });
  check("orca", [&] { pipeline.orca.validate(); });
  const auto& scan = pipeline.scan;
  if (!(scan.eps > 0.0)) throw ConfigError("scan_clustering.eps", "must be > 0");
  if (scan.min_pts < 1) throw ConfigError("scan_clustering.min_pts", "must be >= 1");
  if (!(scan.max_extent > 0.0)) throw ConfigError("scan_clustering.max_extent", "must be > 0");
  if (!(scan.gating_radius > 0.0)) throw ConfigError("scan_clustering.gating_radius", "must be > 0");
  if (pipeline.prediction.future != pipeline.mpc.horizon) {
    throw ConfigError("prediction.future", "must equal mpc.horizon");
  }
  if (pipeline.oracle_timeout_ms <= 0) throw ConfigError("oracle.timeout_ms", "must be > 0");
  if (scenario.method.oracle == OracleKind::external && pipeline.oracle_command.empty()) {
    throw ConfigError("oracle.command", "required by method " + scenario.method.name());
  }
  if (crowd.source == CrowdSource::dataset) {
    if (crowd.dataset_path.empty()) throw ConfigError("crowd.dataset_path", "required when crowd.source is dataset");
    if (!(crowd.frame_dt > 0.0)) throw ConfigError("crowd.frame_dt", "must be > 0");
  }
  if (scenario.mode == Mode::offline && crowd.source == CrowdSource::none) {
    throw ConfigError("crowd.source", "offline mode replays recorded trajectories; use dataset or synthetic");
  }
  if (crowd.groups_min < 1 || crowd.groups_max < crowd.groups_min) {
    throw ConfigError("crowd.groups_max", "need 1 <= groups_min <= groups_max");
  }
  check("crowd.synthetic", [&] { crowd.synthetic.validate(); });
  if (seeds.count < 1) throw ConfigError("seeds.count", "must be >= 1");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  auto& pc = c.pipeline;

  bool explicit_start = false;
  bool explicit_goal = false;
  if (top.has("scenario")) {
    Section s = top.child("scenario");
    auto& sc = c.scenario;
    s.read_enum("task", sc.task, parse_task);
    s.read_enum("mode", sc.mode, parse_mode);
    s.read_enum("perception", sc.perception, parse_perception);
    s.read_enum("method", sc.method, parse_method);
    if (s.has("test_region")) {
      Section r = s.child("test_region");
      r.read("min", sc.test_region.min);
      r.read("max", sc.test_region.max);
      r.finish();
    }
    explicit_start = s.has("robot_start");
    explicit_goal = s.has("robot_goal");
    s.read("robot_start", sc.robot_start);
    s.read("robot_goal", sc.robot_goal);
    s.read("min_peds", sc.min_peds);
    s.read("timeout", sc.timeout);
    s.read("goal_radius", sc.goal_radius);
    s.read("collision_radius", sc.collision_radius);
    s.read("cooldown", sc.cooldown);
    s.read("dt", sc.dt);
    s.finish();
  }
  if (!explicit_start || !explicit_goal) {
    ScenarioSpec placed = c.scenario;
    place_robot(placed);
    if (!explicit_start) c.scenario.robot_start = placed.robot_start;
    if (!explicit_goal) c.scenario.robot_goal = placed.robot_goal;
  }

  if (top.has("mpc")) {
    Section s = top.child("mpc");
    s.read("horizon", pc.mpc.horizon);
    s.read("gamma", pc.mpc.gamma);
    s.read("lambda", pc.mpc.lambda);
    s.read("v_max", pc.mpc.v_max);
    s.read("omega_max", pc.mpc.omega_max);
    s.read("n_samples", pc.mpc.n_samples);
    s.read_enum("drive_mode", pc.mpc.drive_mode, parse_drive);
    s.read("d0", pc.mpc.d0);
    s.finish();
  }
  if (top.has("grouping")) {
    Section s = top.child("grouping");
    s.read("group_eps", pc.grouping.group_eps);
    s.read("velocity_weight", pc.grouping.velocity_weight);
    s.read("min_pts", pc.grouping.min_pts);
    s.read("offset_d", pc.grouping.offset_d);
    s.read("boundary_samples", pc.grouping.boundary_samples);
    if (s.has("egg")) {
      Section e = s.child("egg");
      e.read("base_radius", pc.grouping.egg.base_radius);
      e.read("front_gain", pc.grouping.egg.front_gain);
      e.read("side_ratio", pc.grouping.egg.side_ratio);
      e.read("rear_ratio", pc.grouping.egg.rear_ratio);
      e.finish();
    }
    s.finish();
  }
  if (top.has("prediction")) {
    Section s = top.child("prediction");
    s.read("history", pc.prediction.history);
    s.read("future", pc.prediction.future);
    s.read("association_radius", pc.prediction.association_radius);
    s.finish();
  }
  if (top.has("lidar")) {
    Section s = top.child("lidar");
    s.read("angular_resolution_deg", pc.lidar.angular_resolution_deg);
    s.read("max_range", pc.lidar.max_range);
    s.read("noise_half_width", pc.lidar.noise_half_width);
    s.read("pedestrian_radius", pc.lidar.pedestrian_radius);
    s.finish();
  }
  if (top.has("scan_clustering")) {
    Section s = top.child("scan_clustering");
    s.read("eps", pc.scan.eps);
    s.read("min_pts", pc.scan.min_pts);
    s.read("max_extent", pc.scan.max_extent);
    s.read("gating_radius", pc.scan.gating_radius);
    s.finish();
  }
  if (top.has("orca")) {
    Section s = top.child("orca");
    s.read("radius", pc.orca.radius);
    s.read("max_speed", pc.orca.max_speed);
    s.read("time_horizon", pc.orca.time_horizon);
    s.read("neighbor_dist", pc.orca.neighbor_dist);
    s.read("robot_radius", pc.orca.robot_radius);
    s.read("goal_tolerance", pc.orca.goal_tolerance);
    s.read("formation_gain", pc.orca.formation_gain);
    s.finish();
  }
  if (top.has("oracle")) {
    Section s = top.child("oracle");
    s.read("command", pc.oracle_command);
    s.read("timeout_ms", pc.oracle_timeout_ms);
    s.finish();
  }
  if (top.has("crowd")) {
    Section s = top.child("crowd");
    s.read_enum("source", c.crowd.source, parse_source);
    s.read("dataset_path", c.crowd.dataset_path);
    s.read("frame_dt", c.crowd.frame_dt);
    s.read("groups_min", c.crowd.groups_min);
    s.read("groups_max", c.crowd.groups_max);
    if (s.has("synthetic")) {
      Section y = s.child("synthetic");
      auto& sy = c.crowd.synthetic;
      y.read("min_group_size", sy.min_group_size);
      y.read("max_group_size", sy.max_group_size);
      y.read("flow_heading", sy.flow_heading);
      y.read("bidirectional", sy.bidirectional);
      y.read("stationary", sy.stationary);
      y.read("lane_margin", sy.lane_margin);
      y.read("speed_min", sy.speed_min);
      y.read("speed_max", sy.speed_max);
      y.read("spawn_window", sy.spawn_window);
      y.read("spawn_offset_min", sy.spawn_offset_min);
      y.read("spawn_offset_max", sy.spawn_offset_max);
      y.read("exit_offset", sy.exit_offset);
      y.read("member_spacing", sy.member_spacing);
      y.read("duration", sy.duration);
      y.finish();
    }
    s.finish();
  }
  if (top.has("seeds")) {
    Section s = top.child("seeds");
    s.read_u64("base", c.seeds.base);
    s.read("count", c.seeds.count);
    s.finish();
  }
  top.read("output_dir", c.output_dir);
  top.finish();

  // Shared values live in one place in the file.
  pc.mpc.dt = c.scenario.dt;
  pc.prediction.dt = c.scenario.dt;
  c.crowd.synthetic.dt = c.scenario.dt;
  c.crowd.synthetic.region = c.scenario.test_region;
  c.crowd.synthetic.orca = pc.orca;
  c.crowd.synthetic.n_groups = c.crowd.groups_min;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  const auto& pc = c.pipeline;
  const auto& sc = c.scenario;
  const auto& sy = c.crowd.synthetic;
  json j;
  j["scenario"] = {{"task", to_string(sc.task)},
                   {"mode", to_string(sc.mode)},
                   {"perception", to_string(sc.perception)},
                   {"method", sc.method.name()},
                   {"test_region", {{"min", point_json(sc.test_region.min)}, {"max", point_json(sc.test_region.max)}}},
                   {"robot_start", point_json(sc.robot_start)},
                   {"robot_goal", point_json(sc.robot_goal)},
                   {"min_peds", sc.min_peds},
                   {"timeout", sc.timeout},
                   {"goal_radius", sc.goal_radius},
                   {"collision_radius", sc.collision_radius},
                   {"cooldown", sc.cooldown},
                   {"dt", sc.dt}};
  j["mpc"] = {{"horizon", pc.mpc.horizon},
              {"gamma", pc.mpc.gamma},
              {"lambda", pc.mpc.lambda},
              {"v_max", pc.mpc.v_max},
              {"omega_max", pc.mpc.omega_max},
              {"n_samples", pc.mpc.n_samples},
              {"drive_mode", pc.mpc.drive_mode == DriveMode::holonomic ? "holonomic" : "nonholonomic"},
              {"d0", pc.mpc.d0}};
  j["grouping"] = {{"group_eps", pc.grouping.group_eps},
                   {"velocity_weight", pc.grouping.velocity_weight},
                   {"min_pts", pc.grouping.min_pts},
                   {"offset_d", pc.grouping.offset_d},
                   {"boundary_samples", pc.grouping.boundary_samples},
                   {"egg",
                    {{"base_radius", pc.grouping.egg.base_radius},
                     {"front_gain", pc.grouping.egg.front_gain},
                     {"side_ratio", pc.grouping.egg.side_ratio},
                     {"rear_ratio", pc.grouping.egg.rear_ratio}}}};
  j["prediction"] = {{"history", pc.prediction.history},
                     {"future", pc.prediction.future},
                     {"association_radius", pc.prediction.association_radius}};
  j["lidar"] = {{"angular_resolution_deg", pc.lidar.angular_resolution_deg},
                {"max_range", pc.lidar.max_range},
                {"noise_half_width", pc.lidar.noise_half_width},
                {"pedestrian_radius", pc.lidar.pedestrian_radius}};
  j["scan_clustering"] = {{"eps", pc.scan.eps},
                          {"min_pts", pc.scan.min_pts},
                          {"max_extent", pc.scan.max_extent},
                          {"gating_radius", pc.scan.gating_radius}};
  j["orca"] = {{"radius", pc.orca.radius},
               {"max_speed", pc.orca.max_speed},
               {"time_horizon", pc.orca.time_horizon},
               {"neighbor_dist", pc.orca.neighbor_dist},
               {"robot_radius", pc.orca.robot_radius},
               {"goal_tolerance", pc.orca.goal_tolerance},
               {"formation_gain", pc.orca.formation_gain}};
  j["oracle"] = {{"command", pc.oracle_command}, {"timeout_ms", pc.oracle_timeout_ms}};
  j["crowd"] = {{"source", to_string(c.crowd.source)},
                {"dataset_path", c.crowd.dataset_path},
                {"frame_dt", c.crowd.frame_dt},
                {"groups_min", c.crowd.groups_min},
                {"groups_max", c.crowd.groups_max},
                {"synthetic",
                 {{"min_group_size", sy.min_group_size},
                  {"max_group_size", sy.max_group_size},
                  {"flow_heading", sy.flow_heading},
                  {"bidirectional", sy.bidirectional},
                  {"stationary", sy.stationary},
                  {"lane_margin", sy.lane_margin},
                  {"speed_min", sy.speed_min},
                  {"speed_max", sy.speed_max},
                  {"spawn_window", sy.spawn_window},
                  {"spawn_offset_min", sy.spawn_offset_min},
                  {"spawn_offset_max", sy.spawn_offset_max},
                  {"exit_offset", sy.exit_offset},
                  {"member_spacing", sy.member_spacing},
                  {"duration", sy.duration}}}};
  j["seeds"] = {{"base", c.seeds.base}, {"count", c.seeds.count}};
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace crowdnav
