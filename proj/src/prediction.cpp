#include "crowdnav/prediction.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <tuple>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace crowdnav {

void PredictionParams::validate() const {
  if (history < 1) throw std::invalid_argument("prediction history must be >= 1");
  if (future < 1) throw std::invalid_argument("prediction future must be >= 1");
  if (!(association_radius > 0.0)) throw std::invalid_argument("association_radius must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("prediction dt must be > 0");
}

namespace {

constexpr long kMaxStaleSteps = 2;

template <typename T>
void trim_front(std::vector<T>& v, std::size_t keep) {
  if (v.size() > keep) v.erase(v.begin(), v.end() - static_cast<std::ptrdiff_t>(keep));
}

}  // namespace

std::vector<KeypointHistory> KeypointTracker::fresh(long t) const {
  std::vector<KeypointHistory> out;
  for (const auto& h : histories) {
    if (h.last_update == t) out.push_back(h);
  }
  return out;
}

std::vector<CentroidHistory> HullTracker::fresh(long t) const {
  std::vector<CentroidHistory> out;
  for (const auto& h : histories) {
    if (h.last_update == t) out.push_back(h);
  }
  return out;
}

std::vector<int> greedy_associate(std::span<const Point2> tracks, std::span<const Point2> detections, double radius) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      const double dist = distance(tracks[t], detections[d]);
      if (dist <= radius) pairs.emplace_back(dist, d, t);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> match(detections.size(), -1);
  std::vector<bool> taken(tracks.size(), false);
  for (const auto& [dist, d, t] : pairs) {
    if (match[d] >= 0 || taken[t]) continue;
    match[d] = static_cast<int>(t);
    taken[t] = true;
  }
  return match;
}

void update_histories(KeypointTracker& tracker, std::span<const GroupSpace> spaces, long t,
                      const PredictionParams& params) {
  std::vector<Point2> track_pos;
  track_pos.reserve(tracker.histories.size());
  for (const auto& h : tracker.histories) track_pos.push_back(h.newest().centroid());
  std::vector<Point2> det_pos;
  det_pos.reserve(spaces.size());
  for (const auto& s : spaces) {
    if (s.kind() != SpaceKind::pentagon) throw std::invalid_argument("update_histories expects pentagon spaces");
    det_pos.push_back(s.keypoints().centroid());
  }

  const auto match = greedy_associate(track_pos, det_pos, params.association_radius);
  for (std::size_t d = 0; d < spaces.size(); ++d) {
    const Keypoints kp = spaces[d].keypoints();
    if (match[d] < 0) {
      KeypointHistory h;
      h.track_id = tracker.next_track_id++;
      h.tau_c = {kp.center};
      h.tau_l = {kp.left};
      h.tau_r = {kp.right};
      h.last_update = t;
      h.latest = *spaces[d].pentagon();
      tracker.histories.push_back(std::move(h));
      continue;
    }
    KeypointHistory& h = tracker.histories[match[d]];
    h.tau_c.push_back(kp.center);
    h.tau_l.push_back(kp.left);
    h.tau_r.push_back(kp.right);
    trim_front(h.tau_c, params.history);
    trim_front(h.tau_l, params.history);
    trim_front(h.tau_r, params.history);
    h.last_update = t;
    h.latest = *spaces[d].pentagon();
  }
  std::erase_if(tracker.histories, [t](const KeypointHistory& h) { return t - h.last_update > kMaxStaleSteps; });
}

Point2 linear_velocity(std::span<const Point2> series, double dt) {
  if (series.size() < 2) return {};
  return (series.back() - series.front()) / (static_cast<double>(series.size() - 1) * dt);
}

namespace {

std::vector<Point2> extrapolate(std::span<const Point2> series, std::size_t f, double dt) {
  const Point2 v = linear_velocity(series, dt);
  std::vector<Point2> out;
  out.reserve(f);
  for (std::size_t k = 1; k <= f; ++k) out.push_back(series.back() + v * (static_cast<double>(k) * dt));
  return out;
}

}  // namespace

KeypointFuture predict_keypoints_linear(const KeypointHistory& history, std::size_t f, double dt) {
  if (history.size() == 0) throw std::invalid_argument("empty key point history");
  return {history.track_id, extrapolate(history.tau_c, f, dt), extrapolate(history.tau_l, f, dt),
          extrapolate(history.tau_r, f, dt)};
}

std::vector<KeypointFuture> LinearOracle::predict(std::span<const KeypointHistory> histories, std::size_t f,
                                                  double dt) {
  std::vector<KeypointFuture> out;
  out.reserve(histories.size());
  for (const auto& h : histories) out.push_back(predict_keypoints_linear(h, f, dt));
  return out;
}

namespace {

nlohmann::json points_json(std::span<const Point2> pts) {
  auto arr = nlohmann::json::array();
  for (const Point2& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Point2> points_from_json(const nlohmann::json& j) {
  std::vector<Point2> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

std::string encode_oracle_request(std::span<const KeypointHistory> histories, std::size_t f, double dt) {
  nlohmann::json req;
  req["f"] = f;
  req["dt"] = dt;
  req["histories"] = nlohmann::json::array();
  for (const auto& h : histories) {
    req["histories"].push_back(
        {{"id", h.track_id}, {"center", points_json(h.tau_c)}, {"left", points_json(h.tau_l)}, {"right", points_json(h.tau_r)}});
  }
  return req.dump();
}

std::vector<KeypointFuture> decode_oracle_response(const std::string& line, std::span<const KeypointHistory> histories,
                                                   std::size_t f) {
  nlohmann::json resp;
  try {
    resp = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw OracleUnavailable(std::string("malformed response: ") + e.what());
  }
  std::vector<KeypointFuture> out;
  try {
    const auto& futures = resp.at("futures");
    if (futures.size() != histories.size()) throw OracleUnavailable("future count mismatch");
    for (std::size_t i = 0; i < futures.size(); ++i) {
      KeypointFuture fut;
      fut.track_id = futures[i].at("id").get<int>();
      if (fut.track_id != histories[i].track_id) throw OracleUnavailable("track id mismatch");
      fut.center = points_from_json(futures[i].at("center"));
      fut.left = points_from_json(futures[i].at("left"));
      fut.right = points_from_json(futures[i].at("right"));
      if (fut.center.size() != f || fut.left.size() != f || fut.right.size() != f) {
        throw OracleUnavailable("future length mismatch");
      }
      for (const auto* series : {&fut.center, &fut.left, &fut.right}) {
        for (const Point2& p : *series) {
          if (!is_finite(p)) throw OracleUnavailable("non-finite prediction");
        }
      }
      out.push_back(std::move(fut));
    }
  } catch (const nlohmann::json::exception& e) {
    throw OracleUnavailable(std::string("malformed response: ") + e.what());
  }
  return out;
}

ExternalOracle::ExternalOracle(std::string command, int timeout_ms)
    : command_(std::move(command)), timeout_ms_(timeout_ms) {
  if (command_.empty()) throw std::invalid_argument("external oracle requires a command");
  start();
}

ExternalOracle::~ExternalOracle() { stop(); }

void ExternalOracle::start() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) throw OracleUnavailable("socketpair failed");
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw OracleUnavailable("fork failed");
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  fd_ = fds[0];
  pid_ = pid;
  buffer_.clear();
  awaiting_first_reply_ = true;
}

void ExternalOracle::stop() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::vector<KeypointFuture> ExternalOracle::predict(std::span<const KeypointHistory> histories, std::size_t f,
                                                    double dt) {
  if (fd_ < 0) start();
  const std::string request = encode_oracle_request(histories, f, dt) + "\n";
  // The first reply after a (re)start also pays for process startup.
  const int budget_ms = timeout_ms_ + (awaiting_first_reply_ ? kStartupGraceMs : 0);
  awaiting_first_reply_ = false;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(budget_ms);

  auto fail = [this](const std::string& why) -> OracleUnavailable {
    stop();
    return OracleUnavailable(why);
  };

  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = ::send(fd_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw fail("write failed");
    sent += static_cast<std::size_t>(n);
  }

  std::string line;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (remaining <= 0) throw fail("timeout");
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining));
    if (ready == 0) throw fail("timeout");
    if (ready < 0) throw fail("poll failed");
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n <= 0) throw fail("oracle process closed the channel");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  try {
    return decode_oracle_response(line, histories, f);
  } catch (const OracleUnavailable&) {
    stop();
    throw;
  }
}

Pentagon pentagon_at(const Keypoints& kp, Point2 reference, double offset_d) {
  try {
    return build_pentagon(kp, reference, offset_d);
  } catch (const GeometryError&) {
    Pentagon p;
    p.vertices = {kp.left, kp.center, kp.right, kp.right, kp.left};
    p.outline = {kp.left, kp.center, kp.right};
    return p;
  }
}

std::vector<std::vector<GroupSpace>> predict_group_spaces(std::span<const KeypointHistory> histories,
                                                          KeypointOracle* oracle, const PredictionParams& params,
                                                          std::span<const Point2> robot_future, double offset_d) {
  if (robot_future.size() != params.future) throw std::invalid_argument("robot_future length must equal f");
  std::vector<std::vector<GroupSpace>> out(params.future);
  if (oracle == nullptr) {
    for (auto& step : out) {
      for (const auto& h : histories) step.push_back({h.track_id, h.latest});
    }
    return out;
  }
  const auto futures = oracle->predict(histories, params.future, params.dt);
  for (std::size_t k = 0; k < params.future; ++k) {
    for (const auto& fut : futures) {
      out[k].push_back({fut.track_id, pentagon_at(fut.at(k), robot_future[k], offset_d)});
    }
  }
  return out;
}

void update_hull_histories(HullTracker& tracker, std::span<const GroupSpace> spaces, long t,
                           const PredictionParams& params) {
  std::vector<Point2> track_pos;
  for (const auto& h : tracker.histories) track_pos.push_back(h.centroids.back());
  std::vector<Point2> det_pos;
  for (const auto& s : spaces) {
    if (s.kind() != SpaceKind::hull) throw std::invalid_argument("update_hull_histories expects hull spaces");
    det_pos.push_back(s.centroid());
  }
  const auto match = greedy_associate(track_pos, det_pos, params.association_radius);
  for (std::size_t d = 0; d < spaces.size(); ++d) {
    if (match[d] < 0) {
      tracker.histories.push_back({tracker.next_track_id++, {det_pos[d]}, t, *spaces[d].hull()});
      continue;
    }
    CentroidHistory& h = tracker.histories[match[d]];
    h.centroids.push_back(det_pos[d]);
    trim_front(h.centroids, params.history);
    h.last_update = t;
    h.latest = *spaces[d].hull();
  }
  std::erase_if(tracker.histories, [t](const CentroidHistory& h) { return t - h.last_update > kMaxStaleSteps; });
}

std::vector<ConvexHullShape> predict_hull_linear(const ConvexHullShape& hull, std::span<const Point2> centroid_history,
                                                 std::size_t f, double dt) {
  if (centroid_history.empty()) throw std::invalid_argument("empty centroid history");
  const Point2 v = linear_velocity(centroid_history, dt);
  std::vector<ConvexHullShape> out;
  out.reserve(f);
  for (std::size_t k = 1; k <= f; ++k) {
    const Point2 shift = v * (static_cast<double>(k) * dt);
    ConvexHullShape moved = hull;
    for (Point2& p : moved.vertices) p += shift;
    out.push_back(std::move(moved));
  }
  return out;
}

}  // namespace crowdnav
