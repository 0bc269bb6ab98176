#include "crowdnav/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace crowdnav {

TrajectoryDataset::TrajectoryDataset(std::vector<DatasetRecord> records, double frame_dt)
    : records_(std::move(records)), frame_dt_(frame_dt) {
  if (!(frame_dt > 0.0)) throw DatasetError("frame_dt must be > 0");
  std::set<std::pair<long, int>> seen;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  bounds_ = {{kInf, kInf}, {-kInf, -kInf}};
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!is_finite(r.position)) throw DatasetError("record " + std::to_string(i + 1) + ": non-finite position");
    if (!seen.emplace(r.frame, r.ped_id).second) {
      throw DatasetError("record " + std::to_string(i + 1) + ": duplicate (frame, id) (" + std::to_string(r.frame) +
                         ", " + std::to_string(r.ped_id) + ")");
    }
    auto [it, inserted] = track_index_.emplace(r.ped_id, tracks_.size());
    if (inserted) tracks_.push_back({r.ped_id, {}, {}});
    Track& t = tracks_[it->second];
    if (!t.frames.empty() && r.frame <= t.frames.back()) {
      throw DatasetError("record " + std::to_string(i + 1) + ": frames out of order for id " + std::to_string(r.ped_id));
    }
    t.frames.push_back(r.frame);
    t.positions.push_back(r.position);
    bounds_.min = {std::min(bounds_.min.x, r.position.x), std::min(bounds_.min.y, r.position.y)};
    bounds_.max = {std::max(bounds_.max.x, r.position.x), std::max(bounds_.max.y, r.position.y)};
  }
  std::sort(tracks_.begin(), tracks_.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < tracks_.size(); ++i) track_index_[tracks_[i].id] = i;
}

double TrajectoryDataset::start_time() const {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& tr : tracks_) t = std::min(t, tr.first_time(frame_dt_));
  return tracks_.empty() ? 0.0 : t;
}

double TrajectoryDataset::end_time() const {
  double t = -std::numeric_limits<double>::infinity();
  for (const auto& tr : tracks_) t = std::max(t, tr.last_time(frame_dt_));
  return tracks_.empty() ? 0.0 : t;
}

const TrajectoryDataset::Track* TrajectoryDataset::track(int id) const {
  const auto it = track_index_.find(id);
  return it == track_index_.end() ? nullptr : &tracks_[it->second];
}

std::optional<Point2> TrajectoryDataset::position_at(int id, double t) const {
  const Track* tr = track(id);
  if (tr == nullptr) return std::nullopt;
  // Small slack so times computed by repeated dt addition still hit end frames.
  constexpr double kSlack = 1e-9;
  const double frame = t / frame_dt_;
  const double first = static_cast<double>(tr->frames.front());
  const double last = static_cast<double>(tr->frames.back());
  if (frame < first - kSlack || frame > last + kSlack) return std::nullopt;
  if (tr->frames.size() == 1 || frame <= first) return tr->positions.front();
  if (frame >= last) return tr->positions.back();
  const auto it = std::upper_bound(tr->frames.begin(), tr->frames.end(), frame,
                                   [](double f, long v) { return f < static_cast<double>(v); });
  const std::size_t hi = static_cast<std::size_t>(it - tr->frames.begin());
  const std::size_t lo = hi - 1;
  const double f0 = static_cast<double>(tr->frames[lo]);
  const double f1 = static_cast<double>(tr->frames[hi]);
  const double u = (frame - f0) / (f1 - f0);
  return tr->positions[lo] + (tr->positions[hi] - tr->positions[lo]) * u;
}

std::optional<int> TrajectoryDataset::group_of(int id) const {
  const auto it = group_of_.find(id);
  if (it == group_of_.end()) return std::nullopt;
  return it->second;
}

namespace {

bool parse_integral(const std::string& token, long& out) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || !std::isfinite(v) || v != std::floor(v)) return false;
  out = static_cast<long>(v);
  return true;
}

bool parse_real(const std::string& token, double& out) {
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end != token.c_str() && *end == '\0' && std::isfinite(out);
}

}  // namespace

TrajectoryDataset parse_dataset(std::istream& in, double frame_dt) {
  std::vector<DatasetRecord> records;
  std::set<std::pair<long, int>> seen;
  std::map<int, long> last_frame;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string tokens[4], extra;
    if (!(row >> tokens[0] >> tokens[1] >> tokens[2] >> tokens[3]) || (row >> extra)) {
      throw DatasetError("line " + std::to_string(line_no) + ": malformed row, expected 'frame id x y'");
    }
    DatasetRecord r;
    long id = 0;
    if (!parse_integral(tokens[0], r.frame) || !parse_integral(tokens[1], id) ||
        !parse_real(tokens[2], r.position.x) || !parse_real(tokens[3], r.position.y)) {
      throw DatasetError("line " + std::to_string(line_no) + ": malformed row, expected 'frame id x y'");
    }
    r.ped_id = static_cast<int>(id);
    if (!seen.emplace(r.frame, r.ped_id).second) {
      throw DatasetError("line " + std::to_string(line_no) + ": duplicate (frame, id)");
    }
    auto [it, inserted] = last_frame.emplace(r.ped_id, r.frame);
    if (!inserted) {
      if (r.frame <= it->second) {
        throw DatasetError("line " + std::to_string(line_no) + ": frames out of order for id " +
                           std::to_string(r.ped_id));
      }
      it->second = r.frame;
    }
    records.push_back(r);
  }
  if (records.empty()) throw DatasetError("dataset is empty");
  return TrajectoryDataset(std::move(records), frame_dt);
}

TrajectoryDataset load_dataset(const std::filesystem::path& path, double frame_dt) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return parse_dataset(in, frame_dt);
}

void write_dataset(std::ostream& out, const TrajectoryDataset& dataset) {
  auto rows = dataset.records();
  std::stable_sort(rows.begin(), rows.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
    return a.frame < b.frame || (a.frame == b.frame && a.ped_id < b.ped_id);
  });
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld %d %.6f %.6f\n", r.frame, r.ped_id, r.position.x, r.position.y);
    out << buf;
  }
}

std::vector<TrackedPosition> replay_step(const TrajectoryDataset& dataset, double t) {
  std::vector<TrackedPosition> out;
  for (const auto& tr : dataset.tracks()) {
    if (const auto p = dataset.position_at(tr.id, t)) out.push_back({tr.id, *p});
  }
  return out;
}

}  // namespace crowdnav
