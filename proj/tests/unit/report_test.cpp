#include <gtest/gtest.h>

#include "tempolower/lowering.hpp"
#include "tempolower/parser.hpp"
#include "tempolower/report.hpp"
#include "tempolower/search.hpp"
#include "test_support.hpp"

namespace tempolower {
namespace {

using nlohmann::json;
using testing::load_domain;
using testing::load_plan;
using testing::load_problem;

void expect_envelope(const json& j, const std::string& kind) {
  EXPECT_EQ(j.at("schema"), kReportSchema);
  EXPECT_EQ(j.at("kind"), kind);
  EXPECT_TRUE(j.at("verdict").is_string());
}

class Figure1Reports : public ::testing::Test {
 protected:
  Domain d = load_domain("figure1/domain.pddl");
  Problem p = load_problem("figure1/problem.pddl", d);
};

TEST_F(Figure1Reports, InvalidValidationCarriesOneViolation) {
  ValidationReport r = validate_plan(d, p, load_plan("figure1/counterexample.plan"), Mode::Pddl21);
  json j = report_json(r);
  expect_envelope(j, "validation");
  EXPECT_EQ(j.at("verdict"), "invalid");
  EXPECT_EQ(j.at("mode"), "pddl21");
  EXPECT_EQ(j.at("violation").at("kind"), "over-all");
  EXPECT_EQ(j.at("violation").at("time"), 2.0);
  EXPECT_EQ(j.at("violation").at("time_exact"), "2");
  EXPECT_EQ(j.at("violation").at("culprit"), "(move-truck truck1 depot market)");
  ASSERT_TRUE(j.at("trace").is_array());
  ASSERT_EQ(j.at("trace").size(), 1u);
  EXPECT_EQ(j.at("trace")[0].at("action"), "(load-truck truck1 depot crate1 crane1)");
  EXPECT_EQ(j.at("trace")[0].at("digest").get<std::string>().size(), 16u);
  EXPECT_EQ(std::string(verdict_name(r)), "invalid");
}

TEST_F(Figure1Reports, ValidValidationHasNullViolation) {
  json j = report_json(validate_plan(d, p, load_plan("figure1/good.plan"), Mode::Pddl21));
  expect_envelope(j, "validation");
  EXPECT_EQ(j.at("verdict"), "valid");
  EXPECT_TRUE(j.at("violation").is_null());
  EXPECT_EQ(j.at("goal_holds"), true);
  EXPECT_EQ(j.at("makespan_exact"), "5");
}

TEST_F(Figure1Reports, TextReportNamesVerdictAndViolation) {
  std::string text = report_text(validate_plan(d, p, load_plan("figure1/counterexample.plan"), Mode::Pddl21));
  EXPECT_NE(text.find("verdict: invalid"), std::string::npos);
  EXPECT_NE(text.find("over-all violation at t=2"), std::string::npos);
}

TEST_F(Figure1Reports, LoweringReportListsPasses) {
  PipelineResult r = run_pipeline(d, p, PipelineInput{});
  json j = report_json(r.reports);
  expect_envelope(j, "lowering");
  ASSERT_TRUE(j.at("passes").is_array());
  ASSERT_EQ(j.at("passes").size(), r.reports.size());
  EXPECT_EQ(j.at("passes")[0].at("pass"), "duration-range");
  EXPECT_EQ(j.at("passes")[1].at("pass"), "over-all");
  std::string dumped = j.dump();
  EXPECT_NE(dumped.find("ongoing-load-truck"), std::string::npos);
  EXPECT_NE(report_text(r.reports).find("ongoing-load-truck"), std::string::npos);
}

TEST_F(Figure1Reports, PlanReportHasExactTimes) {
  SearchBounds b;
  b.horizon = 10;
  SearchResult r = plan_search(d, p, Mode::Pddl21, b);
  json j = report_json(r, Mode::Pddl21);
  expect_envelope(j, "plan");
  EXPECT_EQ(j.at("outcome"), "found");
  EXPECT_EQ(j.at("solvable"), true);
  ASSERT_FALSE(j.at("plan").empty());
  EXPECT_EQ(j.at("plan")[0].at("time_exact"), "0");
  EXPECT_EQ(j.at("plan")[0].at("duration_exact"), "5");
}

TEST(EquivalenceReportTest, AgreeAndDisagreeVerdicts) {
  for (const auto& [name, verdict] : std::vector<std::pair<std::string, std::string>>{
           {"micro/truck", "agree"}, {"micro/overblock", "disagree"}}) {
    Domain d = load_domain(name + "/domain.pddl");
    Problem p = load_problem(name + "/problem.pddl", d);
    PipelineResult lowered = run_pipeline(d, p, PipelineInput{});
    EquivalenceVerdict v = check_equivalence(name, d, p, lowered.domain, lowered.problem, lowered.reports, SearchBounds{});
    json j = report_json(v);
    expect_envelope(j, "equivalence");
    EXPECT_EQ(j.at("verdict"), verdict);
    EXPECT_EQ(std::string(verdict_name(v)), verdict);
    EXPECT_EQ(j.at("agree"), verdict == "agree");
    EXPECT_EQ(j.at("original_solvable"), v.original_solvable());
    EXPECT_EQ(j.at("lowered_solvable"), v.lowered_solvable());
    EXPECT_TRUE(j.contains("witness"));
    EXPECT_TRUE(j.at("notes").is_array());
    EXPECT_NE(report_text(v).find(verdict), std::string::npos);
  }
}

TEST(EquivalenceReportTest, InconclusiveHasNullAgree) {
  Domain d = load_domain("micro/truck/domain.pddl");
  Problem p = load_problem("micro/truck/problem.pddl", d);
  PipelineResult lowered = run_pipeline(d, p, PipelineInput{});
  SearchBounds b;
  b.max_nodes = 1;
  json j = report_json(check_equivalence("t", d, p, lowered.domain, lowered.problem, lowered.reports, b));
  EXPECT_EQ(j.at("verdict"), "inconclusive");
  EXPECT_TRUE(j.at("agree").is_null());
}

TEST(ErrorReportTest, CarriesLocation) {
  json j = error_json("unbalanced parenthesis", SourceSpan{"d.pddl", 3, 7});
  expect_envelope(j, "error");
  EXPECT_EQ(j.at("verdict"), "error");
  EXPECT_NE(j.dump().find("unbalanced parenthesis"), std::string::npos);
  EXPECT_NE(j.dump().find("d.pddl"), std::string::npos);
}

TEST(ReportTest, NonTerminatingTimesKeepExactText) {
  ValidationReport r;
  r.mode = Mode::Lowered;
  r.valid = false;
  r.violation = Violation{"goal", Rational(7, 3), "goal", "(p)"};
  json j = report_json(r);
  EXPECT_EQ(j.at("violation").at("time_exact"), "7/3");
  EXPECT_NEAR(j.at("violation").at("time").get<double>(), 7.0 / 3.0, 1e-12);
}

}  // namespace
}  // namespace tempolower
