#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/config.hpp"

namespace curvlab::cli {

inline constexpr const char* kToolName = "curvlab";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutDirEnv = "CURVLAB_OUT_DIR";

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitNumericalAbort = 3,
};

/// Sidecar written next to the report as <name><suffix>.
struct OutputFile {
  std::string suffix;
  std::string content;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string str() const;
};

struct RunResult {
  int exit_code = kExitPass;
  json report;
  std::vector<OutputFile> files;
};

/// Runs one campaign in memory. Never throws for config or numerical
/// errors; those become exit codes 2 and 3 with the message in the report.
RunResult run(const Config& cfg);

/// Report text without the wall_time field, for replay comparisons.
std::string canonical_report(const json& report);
std::string report_text(const json& report);

/// Full-precision shortest round-trip formatting; "nan" and "inf" spelled out.
std::string format_double(double x);

/// --out, then the config's output key, then $CURVLAB_OUT_DIR, then
/// ./curvlab-out.
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& cli_out,
                                         const Config& cfg);

/// Writes <dir>/<name>.report.json and every sidecar, each through a temporary
/// file and rename.
void write_outputs(const RunResult& result, const std::filesystem::path& dir,
                   const std::string& name);
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace curvlab::cli
