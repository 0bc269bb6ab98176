#include "crowdnav/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace crowdnav {

using nlohmann::json;

namespace {

std::string fmt_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ReportError("bad number '" + s + "'");
  }
  if (used != s.size()) throw ReportError("bad number '" + s + "'");
  return v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ReportError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json ring_json(const std::vector<Point2>& ring) {
  json a = json::array();
  for (const auto& p : ring) a.push_back(point_json(p));
  return a;
}

std::vector<Point2> ring_from(const json& j) {
  std::vector<Point2> out;
  for (const auto& p : j) out.push_back(point_from(p));
  return out;
}

json row_json(const TrialResult& r) {
  return {{"method", r.method},
          {"task", to_string(r.task)},
          {"mode", to_string(r.mode)},
          {"perception", to_string(r.perception)},
          {"seed", r.seed},
          {"outcome", to_string(r.outcome)},
          {"min_dist", number_or_null(r.min_dist)},
          {"path_length", r.path_length},
          {"mean_step_time", number_or_null(r.mean_step_time)}};
}

}  // namespace

void write_report_csv(std::ostream& out, const AggregateReport& report) {
  out << kCsvHeader << '\n';
  for (const auto& r : report.trials) {
    out << r.method << ',' << to_string(r.task) << ',' << to_string(r.mode) << ',' << to_string(r.perception) << ','
        << r.seed << ',' << to_string(r.outcome) << ',' << fmt_number(r.min_dist) << ','
        << fmt_number(r.path_length) << ',' << fmt_number(r.mean_step_time) << '\n';
  }
}

std::vector<TrialResult> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ReportError("missing or unexpected csv header");
  std::vector<TrialResult> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ReportError("line " + std::to_string(line_no) + ": expected 9 columns");
    try {
      TrialResult r;
      r.method = parse_method(cells[0]).name();
      r.task = parse_task(cells[1]);
      r.mode = parse_mode(cells[2]);
      r.perception = parse_perception(cells[3]);
      std::size_t used = 0;
      r.seed = std::stoull(cells[4], &used);
      if (used != cells[4].size()) throw ReportError("bad seed");
      r.outcome = parse_outcome(cells[5]);
      r.success = r.outcome == Outcome::reached;
      r.min_dist = parse_number(cells[6]);
      r.path_length = parse_number(cells[7]);
      r.mean_step_time = parse_number(cells[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ReportError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::string report_json(const AggregateReport& report) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"method", m.method},
                       {"n_trials", m.n_trials},
                       {"success_rate", m.success_rate},
                       {"mean_min_dist", number_or_null(m.mean_min_dist)},
                       {"mean_path_length", m.mean_path_length},
                       {"mean_step_time", number_or_null(m.mean_step_time)}});
  }
  json trials = json::array();
  for (const auto& r : report.trials) trials.push_back(row_json(r));
  return json{{"methods", methods}, {"trials", trials}}.dump(2) + "\n";
}

std::string trial_json(const TrialResult& r) {
  json j = row_json(r);
  j["trial_start"] = r.trial_start;
  j["goal"] = point_json(r.goal);
  j["oracle_fallbacks"] = r.oracle_fallbacks;
  json traj = json::array();
  for (const auto& p : r.trajectory) traj.push_back({p.t, p.position.x, p.position.y});
  j["trajectory"] = traj;
  json steps = json::array();
  for (double s : r.step_times) steps.push_back(s);
  j["step_times"] = steps;
  json frames = json::array();
  for (const auto& f : r.frames) {
    json spaces = json::array();
    for (const auto& s : f.spaces) spaces.push_back(ring_json(s));
    frames.push_back({{"t", f.t}, {"robot", point_json(f.robot)}, {"pedestrians", ring_json(f.pedestrians)},
                      {"spaces", spaces}});
  }
  j["frames"] = frames;
  return j.dump() + "\n";
}

TrialResult trial_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrialResult r;
    r.method = parse_method(j.at("method").get<std::string>()).name();
    r.task = parse_task(j.at("task").get<std::string>());
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.perception = parse_perception(j.at("perception").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.success = r.outcome == Outcome::reached;
    r.min_dist = j.at("min_dist").is_null() ? std::numeric_limits<double>::infinity() : j["min_dist"].get<double>();
    r.path_length = j.at("path_length").get<double>();
    r.mean_step_time = number_from(j.at("mean_step_time"));
    r.trial_start = j.at("trial_start").get<double>();
    r.goal = point_from(j.at("goal"));
    r.oracle_fallbacks = j.at("oracle_fallbacks").get<std::size_t>();
    for (const auto& p : j.at("trajectory")) {
      if (!p.is_array() || p.size() != 3) throw ReportError("trajectory entries must be [t, x, y]");
      r.trajectory.push_back({p[0].get<double>(), {p[1].get<double>(), p[2].get<double>()}});
    }
    for (const auto& s : j.at("step_times")) r.step_times.push_back(s.get<double>());
    for (const auto& f : j.at("frames")) {
      Frame fr;
      fr.t = f.at("t").get<double>();
      fr.robot = point_from(f.at("robot"));
      fr.pedestrians = ring_from(f.at("pedestrians"));
      for (const auto& s : f.at("spaces")) fr.spaces.push_back(ring_from(s));
      r.frames.push_back(std::move(fr));
    }
    return r;
  } catch (const ReportError&) {
    throw;
  } catch (const std::exception& e) {
    throw ReportError(std::string("corrupt trial file: ") + e.what());
  }
}

namespace {

struct Canvas {
  double min_x, max_y, scale;

  std::string x(double v) const { return fmt_number((v - min_x) * scale); }
  std::string y(double v) const { return fmt_number((max_y - v) * scale); }
  std::string points(const std::vector<Point2>& ring) const {
    std::string s;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (i > 0) s += ' ';
      s += x(ring[i].x) + "," + y(ring[i].y);
    }
    return s;
  }
};

}  // namespace

std::string render_svg(const TrialResult& trial, std::optional<std::size_t> frame) {
  const Frame* f = nullptr;
  if (frame) {
    if (*frame >= trial.frames.size()) {
      throw std::out_of_range("frame " + std::to_string(*frame) + " out of range (" +
                              std::to_string(trial.frames.size()) + " frames)");
    }
    f = &trial.frames[*frame];
  } else if (!trial.frames.empty()) {
    f = &trial.frames.back();
  }

  std::vector<Point2> path;
  for (const auto& p : trial.trajectory) path.push_back(p.position);
  std::vector<Point2> extent = path;
  extent.push_back(trial.goal);
  if (f) {
    extent.insert(extent.end(), f->pedestrians.begin(), f->pedestrians.end());
    for (const auto& s : f->spaces) extent.insert(extent.end(), s.begin(), s.end());
  }
  double min_x = trial.goal.x, max_x = trial.goal.x, min_y = trial.goal.y, max_y = trial.goal.y;
  for (const auto& p : extent) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  constexpr double kPad = 1.0;
  constexpr double kScale = 40.0;
  min_x -= kPad;
  min_y -= kPad;
  max_x += kPad;
  max_y += kPad;
  const Canvas c{min_x, max_y, kScale};

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_number((max_x - min_x) * kScale)
    << "\" height=\"" << fmt_number((max_y - min_y) * kScale) << "\">\n"
    << "<title>" << trial.method << " seed " << trial.seed << " " << to_string(trial.outcome) << "</title>\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (f) {
    for (const auto& s : f->spaces) {
      o << "<polygon class=\"space\" points=\"" << c.points(s)
        << "\" fill=\"#f4a582\" fill-opacity=\"0.4\" stroke=\"#ca0020\"/>\n";
    }
    for (const auto& p : f->pedestrians) {
      o << "<circle class=\"pedestrian\" cx=\"" << c.x(p.x) << "\" cy=\"" << c.y(p.y)
        << "\" r=\"6\" fill=\"#0571b0\"/>\n";
    }
  }
  if (!path.empty()) {
    o << "<polyline class=\"trajectory\" points=\"" << c.points(path)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  if (f) {
    o << "<circle class=\"robot\" cx=\"" << c.x(f->robot.x) << "\" cy=\"" << c.y(f->robot.y)
      << "\" r=\"8\" fill=\"black\"/>\n";
  }
  o << "<circle class=\"goal\" cx=\"" << c.x(trial.goal.x) << "\" cy=\"" << c.y(trial.goal.y)
    << "\" r=\"10\" fill=\"none\" stroke=\"#1a9641\" stroke-width=\"3\"/>\n"
    << "</svg>\n";
  return o.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw ReportError("cannot write " + path.string());
}

std::vector<std::filesystem::path> export_report(const AggregateReport& report, ExportFormat format,
                                                 const std::filesystem::path& dir) {
  if (report.trials.empty()) throw ReportError("report is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  switch (format) {
    case ExportFormat::csv: {
      std::ostringstream o;
      write_report_csv(o, report);
      written.push_back(dir / "report.csv");
      write_text_file(written.back(), o.str());
      break;
    }
    case ExportFormat::json:
      written.push_back(dir / "report.json");
      write_text_file(written.back(), report_json(report));
      break;
    case ExportFormat::svg:
      for (const auto& t : report.trials) {
        written.push_back(dir / ("trial_" + t.method + "_" + std::to_string(t.seed) + ".svg"));
        write_text_file(written.back(), render_svg(t));
      }
      break;
  }
  return written;
}

}  // namespace crowdnav
