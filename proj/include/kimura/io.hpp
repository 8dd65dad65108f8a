#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include <kimura/engine.hpp>
#include <kimura/girsanov.hpp>
#include <kimura/holder.hpp>
#include <kimura/report.hpp>

namespace kimura {

/// {name, estimate, stderr, bound, verdict, metadata}; metadata keys are sorted.
nlohmann::ordered_json report_to_json(const DiagnosticReport& report);
DiagnosticReport report_from_json(const nlohmann::json& j);

std::string reports_to_json_text(const std::vector<DiagnosticReport>& reports);
std::vector<DiagnosticReport> reports_from_json_text(const std::string& text);

/// CSV with columns path, time, x_1..x_n, y_1..y_m.
void write_paths_csv(std::ostream& out, const PathBundle& bundle);

/// CSV with columns path, step, dW_1..dW_d.
void write_increments_csv(std::ostream& out, const PathBundle& bundle);

/// CSV with columns path, time, log_weight (excluded paths are omitted).
void write_weights_csv(std::ostream& out, const WeightedPathBundle& wbundle);

/// CSV with columns region, term, level, estimate.
void write_norms_csv(std::ostream& out, const std::vector<HolderNormRow>& rows);

}  // namespace kimura
