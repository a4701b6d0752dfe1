#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace skewerg {

enum class Command { classify, predict, simulate, couple, diagnose, verify_paper };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Rejected configuration: unknown key, wrong type, out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every key the configuration accepts, with its default value.
nlohmann::json default_config();

/// defaults <- file <- overrides, restricted to the sections the command
/// reads. Throws ConfigError for unknown keys, type changes and a file
/// whose "command" differs from `command`.
nlohmann::json resolve_config(Command command, const nlohmann::json& file, const nlohmann::json& overrides);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunOutput {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<OutputFile> data;  // CSV tables next to the report
};

/// Validates the whole resolved config (ConfigError), then executes it.
/// Numeric failures give exit 3 with the failing rule in the report;
/// other input errors found while running are rethrown as ConfigError.
RunOutput execute(Command command, const nlohmann::json& resolved);

/// Report text in the resolved format: pretty JSON, or key,value CSV.
std::string render_report(const RunOutput& output, const nlohmann::json& resolved);

/// Full command line front end. Writes the report to `out` when no output
/// directory is configured, otherwise writes report.{json,csv} and the data
/// tables into it. Returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skewerg
