#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/bench.hpp"

namespace crowdnav {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "method,task,mode,perception,seed,outcome,min_dist,path_length,mean_step_time";

/// One row per trial, 6 decimals; +inf prints as "inf" and NaN as "nan".
void write_report_csv(std::ostream& out, const AggregateReport& report);
/// Rows come back as TrialResults carrying only the CSV columns.
std::vector<TrialResult> read_report_csv(std::istream& in);

/// Aggregates plus per-trial rows; non-finite numbers become null.
std::string report_json(const AggregateReport& report);

/// Full trial record, including trajectory and frames.
std::string trial_json(const TrialResult& trial);
TrialResult trial_from_json(const std::string& text);

/// Robot path, goal, and the pedestrians and group spaces of frame `frame`
/// (last frame by default). Throws std::out_of_range for a missing frame.
std::string render_svg(const TrialResult& trial, std::optional<std::size_t> frame = std::nullopt);

enum class ExportFormat { csv, json, svg };

/// csv/json write `report.csv`/`report.json` into `dir`; svg writes one
/// `trial_<method>_<seed>.svg` per trial. Returns the written paths.
std::vector<std::filesystem::path> export_report(const AggregateReport& report, ExportFormat format,
                                                 const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace crowdnav
