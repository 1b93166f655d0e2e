#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace conecert {

enum class Holds { Yes, No, Inconclusive };

inline const char* to_string(Holds h) {
  switch (h) {
    case Holds::Yes: return "yes";
    case Holds::No: return "no";
    case Holds::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

// Structured numeric evidence attached to a verdict.
struct Evidence {
  std::map<std::string, double> numbers;
  std::vector<std::string> notes;

  Evidence& set(const std::string& key, double value) {
    numbers[key] = value;
    return *this;
  }
  Evidence& note(std::string text) {
    notes.push_back(std::move(text));
    return *this;
  }
};

// Outcome of one assumption check on a density.
//
// `exact` is true when the verdict was decided in closed form. Numeric scans
// only establish the property on the scanned domain recorded in `note`.
struct AssumptionVerdict {
  Holds holds = Holds::Inconclusive;
  std::optional<std::vector<double>> witness;
  std::optional<double> value;
  bool exact = true;
  std::string note;

  static AssumptionVerdict yes(std::optional<double> value = std::nullopt) {
    AssumptionVerdict v;
    v.holds = Holds::Yes;
    v.value = value;
    return v;
  }
  static AssumptionVerdict no(std::vector<double> witness,
                              std::optional<double> value = std::nullopt) {
    AssumptionVerdict v;
    v.holds = Holds::No;
    v.witness = std::move(witness);
    v.value = value;
    return v;
  }
  static AssumptionVerdict inconclusive(std::string why) {
    AssumptionVerdict v;
    v.holds = Holds::Inconclusive;
    v.exact = false;
    v.note = std::move(why);
    return v;
  }
};

}  // namespace conecert
