#pragma once

#include <string>
#include <vector>

#include <kimura/config.hpp>
#include <kimura/report.hpp>

namespace kimura {

enum class Command { kValidate, kSimulate, kDiagnose, kCompare, kHolder, kReport };

const char* to_string(Command command);
Command command_from_string(const std::string& name);

struct RunOutcome {
  std::vector<DiagnosticReport> reports;
  int exit_code = 0;
  std::vector<std::string> written;  // files written under output_dir
};

/// 0 if every verdict is PASS, 1 if any is FAIL, 2 if the rest are only PASS and INCONCLUSIVE.
int exit_code_for(const std::vector<DiagnosticReport>& reports);

/// Model validators: boundary drift, ellipticity, singular bounds and the theta bound.
std::vector<DiagnosticReport> validate_model(const RunConfig& config);

/// Runs one command and writes its artifacts into config.output_dir. Module errors are
/// rethrown with the failing experiment named; the caller maps them to exit status 3.
RunOutcome run(const RunConfig& config, Command command);

/// Re-reads report.json from output_dir.
RunOutcome read_report(const std::string& output_dir);

}  // namespace kimura
