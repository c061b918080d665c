#pragma once

#include "rdc/circuits.hpp"
#include "rdc/model.hpp"
#include "rdc/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rdc {

/// Identifies the numerical engine. Outputs are a pure function of
/// (scenario hash, precision, engine version).
inline constexpr std::string_view kEngineVersion = "rdcsim-1.0.0";
inline constexpr int kRecordFormatVersion = 1;

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  bool operator==(const OutputFile&) const = default;
};

enum class RunStatus { completed, failed };
std::string_view to_string(RunStatus s);

struct RunRecord {
  RunStatus status = RunStatus::completed;
  std::string error;  // empty unless failed
  std::string scenario_hash;
  Scenario scenario;
  DetectorOutcomes detector_outcomes;
  std::vector<OutputFile> output_files;
  std::string engine_version{kEngineVersion};
  std::string started_at;  // UTC, ISO 8601
  double wall_time_seconds = 0.0;
  std::int64_t final_step = 0;
  std::string field_checksum;

  /// Hash matches the embedded scenario; outcomes cover every detector.
  void validate() const;
  bool operator==(const RunRecord&) const = default;
};

std::string serialize_record(const RunRecord& record);
/// Strict parse; rejects a record whose hash does not match its scenario.
RunRecord parse_record(std::string_view text);
RunRecord load_record(const std::filesystem::path& path);

struct ExecuteOptions {
  int threads = 0;
  KernelKind kernel = KernelKind::parallel;
  /// Called at every detector boundary with the step reached.
  std::function<void(std::int64_t step)> progress;
};

/**
 * Runs a scenario and writes its images into `out_dir` (created if needed).
 *
 * Events stamped k are applied at boundary k before integrating step k.
 * A simulation or I/O failure does not throw: the returned record is
 * marked failed and carries whatever was produced.
 */
RunRecord execute(const Scenario& scenario, const std::filesystem::path& out_dir,
                  const ExecuteOptions& options = {});

/// Outcome of re-running a recorded scenario.
struct ReproductionCheck {
  bool hash_matches = false;
  bool outcomes_match = false;
  bool images_match = false;
  bool checksum_matches = false;
  RunRecord rerun;
  bool ok() const {
    return hash_matches && outcomes_match && images_match && checksum_matches &&
           rerun.status == RunStatus::completed;
  }
};

ReproductionCheck reproduce(const RunRecord& record, const std::filesystem::path& out_dir,
                            const ExecuteOptions& options = {});

/// UTC now as 2026-01-02T03:04:05.678901Z.
std::string utc_timestamp();

}  // namespace rdc
