#include <gtest/gtest.h>

#include <filesystem>

#include "tempolower/parser.hpp"
#include "tempolower/printer.hpp"
#include "test_support.hpp"

namespace tempolower {
namespace {

using testing::corpus_path;
using testing::read_text;

ModelError domain_error(const std::string& text) {
  try {
    parse_domain(text, "d.pddl");
  } catch (const ModelError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ModelError("none");
}

TEST(ParserTest, UnbalancedParenReportsLineAndColumn) {
  ModelError e = domain_error("(define (domain d)\n  (:predicates (p ?x)\n");
  EXPECT_EQ(e.span().file, "d.pddl");
  EXPECT_GT(e.span().line, 0);
  EXPECT_GT(e.span().column, 0);
  EXPECT_NE(std::string(e.what()).find("d.pddl:"), std::string::npos);
}

TEST(ParserTest, StrayCloseParenIsAnError) {
  ModelError e = domain_error("(define (domain d)))");
  EXPECT_EQ(e.span().line, 1);
}

TEST(ParserTest, UnknownSectionKeywordNamesToken) {
  ModelError e = domain_error("(define (domain d)\n  (:bogus (p)))");
  EXPECT_EQ(e.span().line, 2);
  EXPECT_EQ(e.span().column, 4);
  EXPECT_NE(e.token().find(":bogus"), std::string::npos);
}

TEST(ParserTest, ArityMismatchIsReported) {
  ModelError e = domain_error(R"((define (domain d)
  (:predicates (p ?x))
  (:action a :parameters (?x) :precondition (p ?x ?x) :effect (p ?x))))");
  EXPECT_EQ(e.span().line, 3);
}

TEST(ParserTest, ParameterTypeMismatchIsReported) {
  ModelError e = domain_error(R"((define (domain d)
  (:types truck location)
  (:predicates (at ?t - truck ?l - location))
  (:action a :parameters (?l - location) :precondition (at ?l ?l) :effect (and))))");
  EXPECT_EQ(e.span().line, 4);
}

TEST(ParserTest, UndeclaredPredicateInGoalIsReported) {
  Domain d = parse_domain("(define (domain d) (:predicates (p)))");
  try {
    parse_problem("(define (problem q) (:domain d)\n (:init (p))\n (:goal (r)))", d, "q.pddl");
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.span().line, 3);
    EXPECT_NE(e.token().find("r"), std::string::npos);
  }
}

TEST(ParserTest, UnknownObjectInInitIsReported) {
  Domain d = parse_domain("(define (domain d) (:predicates (p ?x)))");
  EXPECT_THROW(parse_problem("(define (problem q) (:domain d) (:objects a) (:init (p b)) (:goal (p a)))", d),
               ModelError);
}

TEST(ParserTest, EmptyDomainRoundTrips) {
  Domain d = parse_domain("(define (domain empty))");
  EXPECT_EQ(d.name, "empty");
  EXPECT_EQ(parse_domain(print_domain(d)), d);
}

TEST(ParserTest, NamesAreCaseInsensitive) {
  Domain d = parse_domain("(define (DOMAIN Mixed) (:predicates (onHeatSource ?p)))");
  ASSERT_EQ(d.predicates.size(), 1u);
  EXPECT_EQ(d.predicates[0].name, "onheatsource");
}

TEST(ParserTest, ProblemFluentsAreExact) {
  Domain d = testing::load_domain("figure4/domain.pddl");
  Problem p = testing::load_problem("figure4/problem.pddl", d);
  ASSERT_EQ(p.init_fluents.size(), 2u);
  EXPECT_EQ(p.init_fluents[0].first.str(), "(temperature pan1)");
  EXPECT_EQ(p.init_fluents[0].second, Rational(20));
  EXPECT_EQ(p.init_fluents[1].second, Rational(2));
}

TEST(ParserTest, RangeDurationParses) {
  Domain d = testing::load_domain("figure3/domain.pddl");
  const ActionSchema* a = d.find_action("burnmatch");
  ASSERT_NE(a, nullptr);
  ASSERT_TRUE(a->duration);
  EXPECT_EQ(a->duration->form, DurationSpec::Form::Range);
  EXPECT_EQ(print_expr(a->duration->hi), "5");
}

TEST(PlanParserTest, ParsesStepsWithDurations) {
  Plan plan = parse_plan("; comment\n0.0: (load-truck truck1 depot crate1 crane1) [5]\n\n2: (move-truck truck1 depot market)\n");
  ASSERT_EQ(plan.size(), 2u);
  EXPECT_EQ(plan[0].time, Rational(0));
  EXPECT_EQ(plan[0].action, "load-truck");
  ASSERT_EQ(plan[0].args.size(), 4u);
  EXPECT_EQ(plan[0].args[0], Term::obj("truck1"));
  EXPECT_EQ(plan[0].duration, std::optional<Rational>(Rational(5)));
  EXPECT_EQ(plan[1].time, Rational(2));
  EXPECT_FALSE(plan[1].duration);
}

TEST(PlanParserTest, EmptyPlanIsEmpty) {
  EXPECT_TRUE(parse_plan("").empty());
  EXPECT_TRUE(parse_plan("; nothing\n\n").empty());
}

TEST(PlanParserTest, StepsAreStablySortedByTime) {
  Plan plan = parse_plan("3: (b)\n1: (a)\n3: (c)\n");
  ASSERT_EQ(plan.size(), 3u);
  EXPECT_EQ(plan[0].action, "a");
  EXPECT_EQ(plan[1].action, "b");
  EXPECT_EQ(plan[2].action, "c");
}

TEST(PlanParserTest, NumericArgumentsAreNumbers) {
  Plan plan = parse_plan("10: (heat-water-stop pan1 0)\n");
  ASSERT_EQ(plan[0].args.size(), 2u);
  EXPECT_EQ(plan[0].args[1].kind, Term::Kind::Number);
  EXPECT_EQ(plan[0].args[1].number, Rational(0));
}

TEST(PlanParserTest, NegativeTimeIsAnError) {
  try {
    parse_plan("0: (a)\n-1: (b)\n", "p.plan");
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.span().line, 2);
  }
}

TEST(PlanParserTest, MalformedLinesAreErrors) {
  EXPECT_THROW(parse_plan("0 (a)\n"), ModelError);
  EXPECT_THROW(parse_plan("0: (a) [x]\n"), ModelError);
  EXPECT_THROW(parse_plan("0: a\n"), ModelError);
}

TEST(PlanParserTest, PrintsAndReparses) {
  Plan plan = parse_plan("0: (load-truck truck1 depot crate1 crane1) [5]\n2.5: (move-truck truck1 depot market)\n");
  EXPECT_EQ(parse_plan(print_plan(plan)), plan);
}

TEST(SidecarParserTest, RatesParse) {
  Domain d = testing::load_domain("figure4/domain.pddl");
  auto rates = testing::load_rates("figure4/rates.pddl", d);
  ASSERT_EQ(rates.size(), 1u);
  EXPECT_EQ(rates[0].action, "heat-water");
  ASSERT_EQ(rates[0].rates.size(), 1u);
  EXPECT_EQ(rates[0].rates[0].fluent.str(), "(temperature ?p)");
  ASSERT_EQ(rates[0].overrun.size(), 1u);
  EXPECT_EQ(parse_rates(print_rates(rates), d), rates);
}

TEST(SidecarParserTest, RatesForUnknownActionFail) {
  Domain d = testing::load_domain("figure4/domain.pddl");
  EXPECT_THROW(parse_rates("(:rates (boil ((temperature ?p) 1)))", d), ModelError);
}

TEST(SidecarParserTest, GroupsParse) {
  Domain d = testing::load_domain("stationary/domain.pddl");
  auto groups = testing::load_groups("stationary/groups.pddl", d);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].name, "must-be-stationary");
  EXPECT_EQ(groups[0].members.size(), 4u);
}

TEST(RoundTripTest, EveryCorpusFileRoundTrips) {
  namespace fs = std::filesystem;
  std::size_t checked = 0;
  for (const auto& rel : testing::corpus_files()) {
    fs::path path(rel);
    std::string dir = path.parent_path().generic_string();
    std::string file = path.filename().string();
    std::string text = read_text(corpus_path(rel));
    SCOPED_TRACE(rel);
    if (path.extension() == ".plan") {
      Plan plan = parse_plan(text, rel);
      EXPECT_EQ(parse_plan(print_plan(plan)), plan);
    } else if (file == "rates.pddl") {
      Domain d = testing::load_domain(dir + "/domain.pddl");
      auto rates = parse_rates(text, d, rel);
      EXPECT_EQ(parse_rates(print_rates(rates), d), rates);
    } else if (file == "groups.pddl") {
      Domain d = testing::load_domain(dir + "/domain.pddl");
      auto groups = parse_groups(text, d, rel);
      EXPECT_FALSE(groups.empty());
    } else if (file.find("problem") != std::string::npos) {
      std::string domain_file = file == "expected-problem.pddl" ? "expected-at-end.pddl" : "domain.pddl";
      Domain d = testing::load_domain(dir + "/" + domain_file);
      Problem p = parse_problem(text, d, rel);
      std::string printed = print_problem(p);
      EXPECT_EQ(parse_problem(printed, d), p);
      EXPECT_EQ(print_problem(parse_problem(printed, d)), printed);
    } else {
      Domain d = parse_domain(text, rel);
      std::string printed = print_domain(d);
      EXPECT_EQ(parse_domain(printed), d);
      EXPECT_EQ(print_domain(parse_domain(printed)), printed);
    }
    ++checked;
  }
  EXPECT_GE(checked, 30u);
}

}  // namespace
}  // namespace tempolower
