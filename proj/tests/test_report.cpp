#include <cmath>
#include <limits>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "conecert/report.hpp"

using namespace conecert;

namespace {

CheckRecord sample_check() {
  CheckRecord c;
  c.name = "A2";
  c.verdict = "yes";
  c.margin = 0.125;
  c.theorem_tag = "flat-normal-stability";
  c.evidence.set("b", 1.0).set("threshold", 6.25).note("closed form");
  c.tolerances["stability"] = 1e-12;
  c.witness = std::vector<double>{0.5, -std::numeric_limits<double>::infinity()};
  return c;
}

}  // namespace

TEST(Report, EmptyReportHasReason) {
  CertificationReport rep;
  rep.subcommand = "assumptions";
  const auto j = nlohmann::json::parse(emit_report(rep));
  EXPECT_TRUE(j["checks"].empty());
  EXPECT_EQ(j["overall"]["reasons"], nlohmann::json::array({"no checks requested"}));
}

TEST(Report, SingleCheckRoundTrips) {
  CertificationReport rep;
  rep.subcommand = "certify stability";
  rep.cone = "prod:3x3";
  rep.density = "pow:0";
  rep.add_check(sample_check());
  rep.overall.certified_stable = true;
  rep.overall.reasons = {"certified"};
  const std::string text = emit_report(rep);
  const auto back = parse_report(text);
  EXPECT_EQ(emit_report(back), text);
  ASSERT_EQ(back.checks().size(), 1u);
  EXPECT_EQ(back.checks()[0].margin, 0.125);
  EXPECT_TRUE(std::isinf(back.checks()[0].witness->at(1)));
  EXPECT_EQ(*back.cone, "prod:3x3");
}

TEST(Report, NanRejectedAtConstruction) {
  CertificationReport rep;
  auto c = sample_check();
  c.margin = std::nan("");
  EXPECT_THROW(rep.add_check(c), std::invalid_argument);
  c = sample_check();
  c.evidence.set("bad", std::nan(""));
  EXPECT_THROW(rep.add_check(c), std::invalid_argument);
}

TEST(Report, KeysSortedAndFixedFormat) {
  CertificationReport rep;
  rep.subcommand = "x";
  rep.add_check(sample_check());
  const std::string text = emit_report(rep);
  EXPECT_NE(text.find("\"margin\": 1.250000000000e-01"), std::string::npos);
  EXPECT_LT(text.find("\"checks\""), text.find("\"cone\""));
  EXPECT_LT(text.find("\"cone\""), text.find("\"overall\""));
  EXPECT_LT(text.find("\"overall\""), text.find("\"tool_version\""));
}

TEST(Report, CsvSummary) {
  CertificationReport rep;
  rep.add_check(sample_check());
  const std::string csv = emit_report(rep, ReportFormat::CsvSummary);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,verdict,margin,theorem_tag");
  EXPECT_NE(csv.find("A2,yes,1.250000000000e-01,flat-normal-stability"), std::string::npos);
}

namespace {

bool gate_with(const char* tag, const char* pre_name, const char* pre_verdict) {
  CertificationReport rep;
  CheckRecord path;
  path.name = "path";
  path.verdict = "certified_minimizing";
  path.theorem_tag = tag;
  rep.add_check(path);
  if (pre_name) {
    CheckRecord pre;
    pre.name = pre_name;
    pre.verdict = pre_verdict;
    rep.add_check(pre);
  }
  return minimizing_gate_satisfied(rep);
}

}  // namespace

TEST(Gate, NeedsMatchingPrecondition) {
  EXPECT_FALSE(gate_with("curvature-criterion", nullptr, ""));
  EXPECT_FALSE(gate_with("curvature-criterion", checks::kGOverTNondecreasing, "yes"));
  EXPECT_FALSE(gate_with("curvature-criterion", checks::kGNondecreasing, "inconclusive"));
  EXPECT_TRUE(gate_with("curvature-criterion", checks::kGNondecreasing, "yes"));
  EXPECT_TRUE(gate_with("plane-minimizing", checks::kGNondecreasing, "yes"));
  EXPECT_TRUE(gate_with("slicing-monotone", checks::kGNondecreasing, "yes"));
  EXPECT_FALSE(gate_with("slicing-impossibility", checks::kGNondecreasing, "yes"));
}

TEST(Gate, SmallCasesNeedRatioMonotonicity) {
  CertificationReport rep;
  CheckRecord s;
  s.name = checks::kSlicingCertificate;
  s.verdict = "certified_minimizing";
  s.theorem_tag = "slicing-small-cases";
  rep.add_check(s);
  CheckRecord pre;
  pre.name = checks::kGNondecreasing;
  pre.verdict = "yes";
  rep.add_check(pre);
  EXPECT_FALSE(minimizing_gate_satisfied(rep));
  pre.name = checks::kGOverTNondecreasing;
  rep.add_check(pre);
  EXPECT_TRUE(minimizing_gate_satisfied(rep));
}
