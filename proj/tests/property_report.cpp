#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "conecert/cli.hpp"
#include "conecert/report.hpp"

using namespace conecert;

namespace {

constexpr int kCases = 1000;

const std::vector<std::string> kNames{"A1", "A2", "g_nondecreasing", "g_over_t_nondecreasing",
                                      "curvature_criterion", "slicing_certificate", "a_priori"};
const std::vector<std::string> kVerdicts{"yes", "no", "inconclusive", "certified_minimizing",
                                         "not_certified", "certified_stable"};
const std::vector<std::string> kTags{"", "curvature-criterion", "plane-minimizing",
                                     "slicing-monotone", "slicing-small-cases",
                                     "slicing-impossibility", "flat-normal-stability"};

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  std::uniform_int_distribution<std::size_t> i(0, v.size() - 1);
  return v[i(rng)];
}

double random_number(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  switch (kind(rng)) {
    case 0: return std::numeric_limits<double>::infinity();
    case 1: return -std::numeric_limits<double>::infinity();
    case 2: return 0.0;
    default: return mant(rng) * std::pow(10.0, expo(rng));
  }
}

CertificationReport random_report(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 6), small(0, 3), coin(0, 1);
  CertificationReport rep;
  rep.subcommand = coin(rng) ? "certify minimizing" : "assumptions";
  if (coin(rng)) rep.cone = "prod:3x3";
  if (coin(rng)) rep.density = "exppow:1,2";
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    CheckRecord c;
    c.name = pick(rng, kNames);
    c.verdict = pick(rng, kVerdicts);
    c.theorem_tag = pick(rng, kTags);
    c.margin = random_number(rng);
    for (int j = small(rng); j > 0; --j) c.evidence.set("e" + std::to_string(j), random_number(rng));
    if (coin(rng)) c.evidence.note("note with \"quotes\", commas\nand a newline");
    if (coin(rng)) c.tolerances["tol"] = random_number(rng);
    if (coin(rng)) {
      std::vector<double> w(static_cast<std::size_t>(small(rng)));
      for (double& x : w) x = random_number(rng);
      c.witness = w;
    }
    rep.add_check(std::move(c));
  }
  rep.overall.certified_stable = coin(rng);
  rep.overall.certified_minimizing = coin(rng);
  if (coin(rng)) rep.overall.reasons.push_back("reason");
  return rep;
}

// Gate oracle: a certified minimizing check whose path precondition, looked
// up as the first record of that name, reads "yes".
bool gate_oracle(const CertificationReport& rep) {
  auto first_verdict = [&](const std::string& name) -> std::string {
    for (const auto& c : rep.checks())
      if (c.name == name) return c.verdict;
    return "";
  };
  for (const auto& c : rep.checks()) {
    if (c.verdict != "certified_minimizing") continue;
    std::string pre;
    if (c.theorem_tag == "slicing-small-cases") pre = "g_over_t_nondecreasing";
    else if (c.theorem_tag == "curvature-criterion" || c.theorem_tag == "plane-minimizing" ||
             c.theorem_tag == "slicing-monotone")
      pre = "g_nondecreasing";
    if (!pre.empty() && first_verdict(pre) == "yes") return true;
  }
  return false;
}

}  // namespace

TEST(ReportProperty, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(601);
  for (int i = 0; i < kCases; ++i) {
    const auto rep = random_report(rng);
    const std::string text = emit_report(rep);
    EXPECT_EQ(emit_report(rep), text);
    const auto back = parse_report(text);
    EXPECT_EQ(emit_report(back), text);
    ASSERT_EQ(back.checks().size(), rep.checks().size());
    for (std::size_t j = 0; j < rep.checks().size(); ++j) {
      const double a = rep.checks()[j].margin, b = back.checks()[j].margin;
      if (std::isinf(a)) EXPECT_EQ(a, b);
      else EXPECT_NEAR(b, a, 1e-11 * std::abs(a));
    }
    EXPECT_EQ(emit_report(back, ReportFormat::CsvSummary), emit_report(rep, ReportFormat::CsvSummary));
  }
}

TEST(ReportProperty, GateMatchesOracle) {
  std::mt19937_64 rng(602);
  for (int i = 0; i < kCases; ++i) {
    const auto rep = random_report(rng);
    EXPECT_EQ(minimizing_gate_satisfied(rep), gate_oracle(rep));
  }
}

TEST(ReportProperty, CliMinimizingClaimsCarryPassingPrecondition) {
  const std::vector<std::string> cones{"plane:3,4", "prod:3x3", "prod:1x5", "prod:2x2x2",
                                       "prod:1x1", "det:2,2,1", "det:2,3,1", "det:3,3,1",
                                       "det:3,4,1", "det:3,3,2", "pf:4,2", "pf:7,2"};
  const std::vector<std::string> densities{"pow:0",    "pow:1",      "pow:2",      "pow:-1",
                                           "pow:0.5", "exppow:1,2", "exppow:-1,2", "const"};
  std::map<std::pair<std::string, std::string>, std::string> cache;
  std::mt19937_64 rng(603);
  int certified = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto key = std::make_pair(pick(rng, cones), pick(rng, densities));
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::ostringstream out, err;
      const int code = cli::run({"certify", "minimizing", "--cone", key.first, "--density",
                                 key.second},
                                out, err);
      ASSERT_NE(code, 3) << err.str();
      it = cache.emplace(key, out.str()).first;
    }
    const auto rep = parse_report(it->second);
    if (!rep.overall.certified_minimizing) continue;
    ++certified;
    EXPECT_TRUE(gate_oracle(rep)) << key.first << " " << key.second;
  }
  EXPECT_GT(certified, 0);
}
