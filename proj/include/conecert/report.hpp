#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conecert/verdicts.hpp"

namespace conecert {

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckRecord {
  std::string name;
  std::string verdict;
  double margin = 0.0;
  std::string theorem_tag;
  Evidence evidence;
  std::map<std::string, double> tolerances;
  std::optional<std::vector<double>> witness;
  double wall_time_ms = 0.0;
};

struct OverallVerdict {
  bool certified_stable = false;
  bool certified_minimizing = false;
  std::vector<std::string> reasons;
};

namespace detail {

inline void require_not_nan(double x, const std::string& what) {
  if (std::isnan(x)) throw std::invalid_argument("report: NaN in " + what);
}

}  // namespace detail

class CertificationReport {
 public:
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::optional<std::string> cone;
  std::optional<std::string> density;
  OverallVerdict overall;

  const std::vector<CheckRecord>& checks() const { return checks_; }

  // Rejects records carrying NaN anywhere in their numbers.
  CheckRecord& add_check(CheckRecord rec) {
    detail::require_not_nan(rec.margin, rec.name + ".margin");
    for (const auto& [k, v] : rec.evidence.numbers) detail::require_not_nan(v, rec.name + "." + k);
    for (const auto& [k, v] : rec.tolerances) detail::require_not_nan(v, rec.name + "." + k);
    if (rec.witness)
      for (double v : *rec.witness) detail::require_not_nan(v, rec.name + ".witness");
    detail::require_not_nan(rec.wall_time_ms, rec.name + ".wall_time_ms");
    checks_.push_back(std::move(rec));
    return checks_.back();
  }

  const CheckRecord* find(const std::string& name) const {
    for (const auto& c : checks_)
      if (c.name == name) return &c;
    return nullptr;
  }

 private:
  std::vector<CheckRecord> checks_;
};

// Check names and verdict strings shared between the pipelines and the gate.
namespace checks {
inline constexpr const char* kGNondecreasing = "g_nondecreasing";
inline constexpr const char* kGOverTNondecreasing = "g_over_t_nondecreasing";
inline constexpr const char* kCurvatureCriterion = "curvature_criterion";
inline constexpr const char* kSlicingCertificate = "slicing_certificate";
}  // namespace checks

// A minimizing claim needs a successful minimizing-path check together with
// the density monotonicity precondition of that path, passing in this report.
inline bool minimizing_gate_satisfied(const CertificationReport& rep) {
  for (const auto& c : rep.checks()) {
    if (c.verdict != "certified_minimizing") continue;
    const char* needed = nullptr;
    if (c.theorem_tag == "curvature-criterion" || c.theorem_tag == "plane-minimizing" ||
        c.theorem_tag == "slicing-monotone") {
      needed = checks::kGNondecreasing;
    } else if (c.theorem_tag == "slicing-small-cases") {
      needed = checks::kGOverTNondecreasing;
    } else {
      continue;
    }
    const CheckRecord* pre = rep.find(needed);
    if (pre && pre->verdict == "yes") return true;
  }
  return false;
}

namespace detail {

inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "\"Infinity\"" : "\"-Infinity\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

inline std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

// Canonical writer: object keys sorted (std::map order), doubles as %.12e,
// two-space indentation.
inline void write_canonical(std::ostream& os, const nlohmann::json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << quote(it.key()) << ": ";
        write_canonical(os, it.value(), indent + 2);
      }
      os << "\n" << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_canonical(os, j[i], indent + 2);
      }
      os << "\n" << close << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline double read_double(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("report: bad number '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::json number_map(const std::map<std::string, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const CertificationReport& rep) {
  nlohmann::json j;
  j["tool_version"] = rep.tool_version;
  j["subcommand"] = rep.subcommand;
  j["cone"] = rep.cone ? nlohmann::json(*rep.cone) : nlohmann::json(nullptr);
  j["density"] = rep.density ? nlohmann::json(*rep.density) : nlohmann::json(nullptr);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks()) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["verdict"] = c.verdict;
    jc["margin"] = c.margin;
    jc["theorem_tag"] = c.theorem_tag;
    jc["evidence"]["numbers"] = detail::number_map(c.evidence.numbers);
    jc["evidence"]["notes"] = c.evidence.notes;
    jc["tolerances"] = detail::number_map(c.tolerances);
    jc["witness"] = c.witness ? nlohmann::json(*c.witness) : nlohmann::json(nullptr);
    jc["wall_time_ms"] = c.wall_time_ms;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  std::vector<std::string> reasons = rep.overall.reasons;
  if (rep.checks().empty() && reasons.empty()) reasons.push_back("no checks requested");
  j["overall"] = {{"certified_stable", rep.overall.certified_stable},
                  {"certified_minimizing", rep.overall.certified_minimizing},
                  {"reasons", reasons}};
  return j;
}

inline CertificationReport from_json(const nlohmann::json& j) {
  CertificationReport rep;
  rep.tool_version = j.at("tool_version").get<std::string>();
  rep.subcommand = j.at("subcommand").get<std::string>();
  if (!j.at("cone").is_null()) rep.cone = j.at("cone").get<std::string>();
  if (!j.at("density").is_null()) rep.density = j.at("density").get<std::string>();
  for (const auto& jc : j.at("checks")) {
    CheckRecord c;
    c.name = jc.at("name").get<std::string>();
    c.verdict = jc.at("verdict").get<std::string>();
    c.margin = detail::read_double(jc.at("margin"));
    c.theorem_tag = jc.at("theorem_tag").get<std::string>();
    for (const auto& [k, v] : jc.at("evidence").at("numbers").items())
      c.evidence.numbers[k] = detail::read_double(v);
    c.evidence.notes = jc.at("evidence").at("notes").get<std::vector<std::string>>();
    for (const auto& [k, v] : jc.at("tolerances").items()) c.tolerances[k] = detail::read_double(v);
    if (!jc.at("witness").is_null()) {
      std::vector<double> w;
      for (const auto& x : jc.at("witness")) w.push_back(detail::read_double(x));
      c.witness = std::move(w);
    }
    c.wall_time_ms = detail::read_double(jc.at("wall_time_ms"));
    rep.add_check(std::move(c));
  }
  const auto& o = j.at("overall");
  rep.overall.certified_stable = o.at("certified_stable").get<bool>();
  rep.overall.certified_minimizing = o.at("certified_minimizing").get<bool>();
  rep.overall.reasons = o.at("reasons").get<std::vector<std::string>>();
  return rep;
}

inline CertificationReport parse_report(const std::string& text) {
  return from_json(nlohmann::json::parse(text));
}

enum class ReportFormat { Json, CsvSummary };

inline std::string emit_report(const CertificationReport& rep, ReportFormat format = ReportFormat::Json) {
  std::ostringstream os;
  if (format == ReportFormat::Json) {
    detail::write_canonical(os, to_json(rep), 0);
    os << "\n";
    return os.str();
  }
  auto csv_field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  auto num = [](double x) {
    if (std::isinf(x)) return std::string(x > 0 ? "Infinity" : "-Infinity");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return std::string(buf);
  };
  os << "name,verdict,margin,theorem_tag\n";
  for (const auto& c : rep.checks())
    os << csv_field(c.name) << "," << csv_field(c.verdict) << "," << num(c.margin) << ","
       << csv_field(c.theorem_tag) << "\n";
  os << "overall.certified_stable," << (rep.overall.certified_stable ? "true" : "false") << ",,\n";
  os << "overall.certified_minimizing," << (rep.overall.certified_minimizing ? "true" : "false")
     << ",,\n";
  return os.str();
}

}  // namespace conecert
