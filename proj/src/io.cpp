#include <kimura/io.hpp>

#include <cstdio>
#include <ostream>

#include <kimura/errors.hpp>

namespace kimura {

namespace {

// Shortest text that round-trips the double.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json report_to_json(const DiagnosticReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["estimate"] = report.estimate;
  j["stderr"] = report.stderr_;
  j["bound"] = report.bound;
  j["verdict"] = to_string(report.verdict);
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.metadata) {
    std::visit([&](const auto& v) { meta[key] = v; }, value);
  }
  j["metadata"] = meta;
  return j;
}

DiagnosticReport report_from_json(const nlohmann::json& j) {
  DiagnosticReport r;
  try {
    r.name = j.at("name").get<std::string>();
    r.estimate = j.at("estimate").is_null() ? std::nan("") : j.at("estimate").get<double>();
    r.stderr_ = j.at("stderr").is_null() ? std::nan("") : j.at("stderr").get<double>();
    r.bound = j.at("bound").is_null() ? std::nan("") : j.at("bound").get<double>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    for (const auto& [key, value] : j.at("metadata").items()) {
      if (value.is_string()) {
        r.metadata[key] = value.get<std::string>();
      } else if (value.is_number_unsigned()) {
        r.metadata[key] = value.get<std::uint64_t>();
      } else if (value.is_number_integer()) {
        r.metadata[key] = value.get<std::int64_t>();
      } else if (value.is_number()) {
        r.metadata[key] = value.get<double>();
      } else if (value.is_null()) {
        r.metadata[key] = std::nan("");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string reports_to_json_text(const std::vector<DiagnosticReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    arr.push_back(report_to_json(r));
  }
  return arr.dump(2) + "\n";
}

std::vector<DiagnosticReport> reports_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("report file is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) {
    throw ConfigError("report file must hold a JSON array");
  }
  std::vector<DiagnosticReport> out;
  for (const auto& item : j) {
    out.push_back(report_from_json(item));
  }
  return out;
}

void write_paths_csv(std::ostream& out, const PathBundle& bundle) {
  out << "path,time";
  for (int i = 0; i < bundle.n; ++i) {
    out << ",x_" << i + 1;
  }
  for (int l = 0; l < bundle.m; ++l) {
    out << ",y_" << l + 1;
  }
  out << '\n';
  const int d = bundle.dim();
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    for (std::size_t r = 0; r < bundle.n_recorded(); ++r) {
      out << bundle.first_path + p << ',' << num(bundle.times[r]);
      const double* s = bundle.states.data() + (p * bundle.n_recorded() + r) * d;
      for (int c = 0; c < d; ++c) {
        out << ',' << num(s[c]);
      }
      out << '\n';
    }
  }
}

void write_increments_csv(std::ostream& out, const PathBundle& bundle) {
  if (!bundle.has_increments()) {
    throw InvalidArgumentError("bundle does not retain increments");
  }
  const int d = bundle.dim();
  out << "path,step";
  for (int c = 0; c < d; ++c) {
    out << ",dW_" << c + 1;
  }
  out << '\n';
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    for (int k = 0; k < bundle.steps; ++k) {
      out << bundle.first_path + p << ',' << k;
      const double* s = bundle.increments.data() + (p * bundle.steps + k) * d;
      for (int c = 0; c < d; ++c) {
        out << ',' << num(s[c]);
      }
      out << '\n';
    }
  }
}

void write_weights_csv(std::ostream& out, const WeightedPathBundle& wbundle) {
  out << "path,time,log_weight\n";
  for (std::size_t p = 0; p < wbundle.n_paths(); ++p) {
    if (wbundle.excluded[p]) {
      continue;
    }
    for (std::size_t r = 0; r < wbundle.base.n_recorded(); ++r) {
      out << wbundle.base.first_path + p << ',' << num(wbundle.base.times[r]) << ',' << num(wbundle.log_weight(p, r))
          << '\n';
    }
  }
}

void write_norms_csv(std::ostream& out, const std::vector<HolderNormRow>& rows) {
  out << "region,term,level,estimate\n";
  for (const auto& row : rows) {
    out << '"' << row.region << "\",\"" << row.term << "\"," << row.level << ',' << num(row.estimate) << '\n';
  }
}

}  // namespace kimura
