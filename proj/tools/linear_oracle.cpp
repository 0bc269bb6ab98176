// Reference key point oracle for `ExternalOracle`: reads one JSON request per
// line on stdin and answers with constant-velocity futures on stdout.
//
//   crowdnav_linear_oracle [--delay-ms N] [--garbage]
//
// --delay-ms sleeps before every reply after the first; --garbage answers
// with malformed lines. Both exist to exercise the client's failure handling.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "crowdnav/prediction.hpp"

using nlohmann::json;

namespace {

std::vector<crowdnav::Point2> points(const json& j) {
  std::vector<crowdnav::Point2> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

json to_json(const std::vector<crowdnav::Point2>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back({p.x, p.y});
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  int delay_ms = 0;
  bool garbage = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--delay-ms") == 0 && i + 1 < argc) {
      delay_ms = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--garbage") == 0) {
      garbage = true;
    } else {
      std::cerr << "usage: crowdnav_linear_oracle [--delay-ms N] [--garbage]\n";
      return 2;
    }
  }

  crowdnav::LinearOracle oracle;
  std::string line;
  bool first = true;
  while (std::getline(std::cin, line)) {
    if (!first && delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    first = false;
    if (garbage) {
      std::cout << "{not json\n" << std::flush;
      continue;
    }
    try {
      const json req = json::parse(line);
      const auto f = req.at("f").get<std::size_t>();
      const double dt = req.at("dt").get<double>();
      std::vector<crowdnav::KeypointHistory> histories;
      for (const auto& h : req.at("histories")) {
        crowdnav::KeypointHistory kh;
        kh.track_id = h.at("id").get<int>();
        kh.tau_c = points(h.at("center"));
        kh.tau_l = points(h.at("left"));
        kh.tau_r = points(h.at("right"));
        histories.push_back(std::move(kh));
      }
      json futures = json::array();
      for (const auto& fut : oracle.predict(histories, f, dt)) {
        futures.push_back(
            {{"id", fut.track_id}, {"center", to_json(fut.center)}, {"left", to_json(fut.left)}, {"right", to_json(fut.right)}});
      }
      std::cout << json{{"futures", futures}}.dump() << '\n' << std::flush;
    } catch (const std::exception& e) {
      std::cout << json{{"error", e.what()}}.dump() << '\n' << std::flush;
    }
  }
  return 0;
}
