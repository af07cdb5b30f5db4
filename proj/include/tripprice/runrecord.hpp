#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tripprice/optimizer.hpp"

namespace tripprice {

inline constexpr const char* kToolVersion = "0.1.0";

/// Self-contained record of one assignment/design run: embeds the canonical
/// scenario text so `evaluate` can reproduce the report from the record
/// alone. Timestamps honor SOURCE_DATE_EPOCH for reproducible reruns.
struct RunRecord {
  std::string tool_version = kToolVersion;
  std::string command;        // assign | design | calibrate
  std::string scenario_name;
  std::string scenario_text;  // canonical serialization
  SchemeKind scheme = SchemeKind::none;
  Weights weights;
  PriceVector prices;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::string timestamp;

  // summaries
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
  double objective_value = 0.0;
  MetricsReport metrics;

  Scenario scenario() const;  // parsed from scenario_text
};

std::string to_json(const RunRecord& r);
RunRecord record_from_json(const std::string& text);
void save_record(const RunRecord& r, const std::filesystem::path& file);
RunRecord load_record(const std::filesystem::path& file);

std::string iso_timestamp_now();  // respects SOURCE_DATE_EPOCH

/// Serialize a metrics report (with optional baseline deltas) as the
/// two-column CSV used by `evaluate` and `compare`.
std::string metrics_csv(const MetricsReport& r, const MetricsReport* baseline);

}  // namespace tripprice
