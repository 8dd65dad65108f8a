#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace kimura {

enum class Verdict { kPass, kFail, kInconclusive };

const char* to_string(Verdict verdict);
Verdict verdict_from_string(const std::string& text);

using MetadataValue = std::variant<double, std::int64_t, std::uint64_t, std::string>;

/// A named scalar estimate with its Monte-Carlo standard error and a verdict.
struct DiagnosticReport {
  std::string name;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  Verdict verdict = Verdict::kInconclusive;
  std::map<std::string, MetadataValue> metadata;

  bool passed() const { return verdict == Verdict::kPass; }
};

/// Verdict for the claim "estimate <= bound" under +/- 3 stderr uncertainty.
Verdict verdict_at_most(double estimate, double stderr_, double bound);

/// Verdict for the claim "estimate >= bound" under +/- 3 stderr uncertainty.
Verdict verdict_at_least(double estimate, double stderr_, double bound);

inline Verdict verdict_from_bool(bool ok) { return ok ? Verdict::kPass : Verdict::kFail; }

/// Sample mean and its plug-in standard error.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

MeanEstimate mean_and_stderr(const std::vector<double>& values);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double level);

/// Human-readable summary table, one line per report.
std::string summary_table(const std::vector<DiagnosticReport>& reports);

}  // namespace kimura
