#include <kimura/report.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <kimura/errors.hpp>

namespace kimura {

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "PASS";
    case Verdict::kFail:
      return "FAIL";
    case Verdict::kInconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

Verdict verdict_from_string(const std::string& text) {
  if (text == "PASS") {
    return Verdict::kPass;
  }
  if (text == "FAIL") {
    return Verdict::kFail;
  }
  if (text == "INCONCLUSIVE") {
    return Verdict::kInconclusive;
  }
  throw InvalidArgumentError("unknown verdict '" + text + "'");
}

Verdict verdict_at_most(double estimate, double stderr_, double bound) {
  if (!std::isfinite(estimate)) {
    return Verdict::kFail;
  }
  if (estimate + 3.0 * stderr_ <= bound) {
    return Verdict::kPass;
  }
  if (estimate - 3.0 * stderr_ > bound) {
    return Verdict::kFail;
  }
  return Verdict::kInconclusive;
}

Verdict verdict_at_least(double estimate, double stderr_, double bound) {
  if (!std::isfinite(estimate)) {
    return Verdict::kFail;
  }
  if (estimate - 3.0 * stderr_ >= bound) {
    return Verdict::kPass;
  }
  if (estimate + 3.0 * stderr_ < bound) {
    return Verdict::kFail;
  }
  return Verdict::kInconclusive;
}

MeanEstimate mean_and_stderr(const std::vector<double>& values) {
  MeanEstimate out;
  out.count = values.size();
  if (values.empty()) {
    throw EstimationError("mean of an empty sample");
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - out.mean) * (v - out.mean);
    }
    const double n = static_cast<double>(values.size());
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) {
    throw EstimationError("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(level, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::string summary_table(const std::vector<DiagnosticReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %14s %12s %14s  %s\n", "diagnostic", "estimate", "stderr", "bound",
                "verdict");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-44s %14.6g %12.4g %14.6g  %s\n", r.name.c_str(), r.estimate, r.stderr_,
                  r.bound, to_string(r.verdict));
    out << line;
  }
  return out.str();
}

}  // namespace kimura
