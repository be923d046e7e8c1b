#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sise/bandwidth.hpp"
#include "sise/core.hpp"
#include "sise/inference.hpp"
#include "sise/npmle.hpp"
#include "sise/simbench.hpp"

namespace sise::io {

using nlohmann::json;

/// Input tables are recognised by their exact header line.
enum class CsvKind {
  kObservations,  // id,time,status
  kIntervals,     // id,left,right
};

struct IntervalRow {
  std::string id;
  core::CensoredInterval interval;
};

struct CsvTable {
  CsvKind kind = CsvKind::kObservations;
  std::vector<core::ObservationRecord> records;
  std::vector<IntervalRow> intervals;
};

/// Throws ParseError with "<source>:<line>: ..." on malformed input.
CsvTable parse_csv(std::string_view text, const std::string& source = "<input>");
CsvTable read_csv(const std::filesystem::path& path);

/// `id,onset` table for the split-sample workflow.
std::vector<std::pair<std::string, double>> read_onsets(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Data ready for fitting: one interval per individual, with the per
/// individual observation counts when they are known.
struct FitInput {
  std::vector<std::string> ids;
  std::vector<core::CensoredInterval> intervals;
  std::vector<int> m_counts;  // empty for interval tables
  core::TimeFrame frame;
};

/// Frame bounds that are given replace the estimated ones; when both are
/// given nothing is estimated, so degenerate data can still be fitted.
FitInput prepare(const CsvTable& table, std::optional<double> frame_left = std::nullopt,
                 std::optional<double> frame_right = std::nullopt);

/// Shortest round-trip formatting, so output bytes are stable.
std::string format_number(double x);

json to_json(const smoothing::FitReport& report);
json to_json(const npmle::GriddedDensity& g);
json to_json(const core::TimeFrame& frame);
json to_json(const simbench::ScenarioConfig& cfg);
json to_json(const simbench::ScenarioReport& report);
json to_json(const inference::BootstrapResult& result);

/// Raw fit: support (null for +inf), masses, convergence, frame and grid.
json raw_fit_json(const bandwidth::SmoothedFit& fit, double step);
json smoothed_fit_json(const bandwidth::SmoothedFit& fit, const core::TimeFrame& frame);
json fit_report_json(const bandwidth::SmoothedFit& fit);

/// Reads the "grid" object of a fit JSON.
npmle::GriddedDensity density_from_json(const json& j);

/// Strict: unknown fields and wrong types are InvalidConfig naming the field.
simbench::ScenarioConfig scenario_from_json(const json& j);

std::string curve_csv(const npmle::GriddedDensity& g);
std::string bands_csv(const inference::BootstrapResult& result);
std::string metrics_csv(const simbench::ScenarioReport& report);

/// Files are staged in memory and only written by commit(): each goes to a
/// temporary sibling first and is renamed into place, so a failed command
/// leaves no partial artifacts.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path directory);

  void stage(const std::string& name, std::string content);
  std::vector<std::string> commit();

 private:
  std::filesystem::path directory_;
  std::vector<std::pair<std::string, std::string>> files_;
};

void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sise::io
