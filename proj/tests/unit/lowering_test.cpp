#include <gtest/gtest.h>

#include <algorithm>

#include "tempolower/lowering.hpp"
#include "tempolower/parser.hpp"
#include "tempolower/printer.hpp"
#include "tempolower/semantics.hpp"
#include "test_support.hpp"

namespace tempolower {
namespace {

using testing::load_domain;
using testing::load_problem;

const char* kClosureDomain = R"((define (domain clos)
  (:types thing slot)
  (:predicates (p ?x - thing ?s - slot) (q ?x - thing) (r))
  (:durative-action hold
    :parameters (?x - thing ?s - slot)
    :duration (= ?duration 2)
    :condition (and (at start (q ?x)) (over all (p ?x ?s)) (over all (q ?x)))
    :effect (and (at end (r))))
  (:action spoil
    :parameters (?z - thing)
    :precondition (r)
    :effect (not (q ?z)))))";

std::string precondition_of(const Domain& d, const std::string& action) {
  const ActionSchema* a = d.find_action(action);
  if (a == nullptr) return "<missing>";
  return print_formula(a->start_condition());
}

bool has_predicate(const Domain& d, const std::string& name) { return d.find_predicate(name) != nullptr; }

TEST(FreshNameTest, SuffixesOnCollision) {
  EXPECT_EQ(fresh_name("ongoing-a", {}), "ongoing-a");
  EXPECT_EQ(fresh_name("ongoing-a", {"ongoing-a"}), "ongoing-a-2");
  EXPECT_EQ(fresh_name("ongoing-a", {"ongoing-a", "ongoing-a-2"}), "ongoing-a-3");
}

TEST(InterferenceTest, Figure1HasOneEdgeFromMoveTruck) {
  Domain d = load_domain("figure1/domain.pddl");
  auto edges = detect_interference(d);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].protector, "load-truck");
  EXPECT_EQ(edges[0].interferer, "move-truck");
  EXPECT_TRUE(edges[0].protected_literal.positive);
  EXPECT_EQ(edges[0].protected_literal.atom.predicate, "at");
  EXPECT_EQ(edges[0].effect.kind, Effect::Kind::Delete);
}

TEST(InterferenceTest, CargoDeleteDoesNotThreatenTruckPosition) {
  Domain d = load_domain("figure1/domain.pddl");
  for (const auto& e : detect_interference(d)) EXPECT_NE(e.interferer, "load-truck");
}

TEST(InterferenceTest, ConditionalEffectsCount) {
  Domain d = load_domain("micro/overblock/domain.pddl");
  auto edges = detect_interference(d);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].interferer, "reset");
}

TEST(InterferenceTest, NonLiteralOverAllIsRejected) {
  Domain d = parse_domain(R"((define (domain bad)
    (:predicates (p) (q))
    (:durative-action a :parameters () :duration (= ?duration 1)
      :condition (and (over all (or (p) (q)))) :effect (and (at end (p))))))");
  try {
    detect_interference(d);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
  EXPECT_THROW(lower_over_all(d), ModelError);
}

TEST(OverAllTest, Figure1ProgressiveGuardsMoveTruck) {
  Domain d = load_domain("figure1/domain.pddl");
  LoweringResult r = lower_over_all(d);
  const PredicateDecl* p = r.domain.find_predicate("ongoing-load-truck");
  ASSERT_NE(p, nullptr);
  ASSERT_EQ(p->parameters.size(), 1u);
  EXPECT_EQ(p->parameters[0].name, "?t");
  EXPECT_EQ(precondition_of(r.domain, "move-truck"), "(and (at ?t ?from) (not (ongoing-load-truck ?t)))");
  const ActionSchema* load = r.domain.find_action("load-truck");
  ASSERT_NE(load, nullptr);
  for (const auto& c : load->conditions) EXPECT_NE(c.tag, TimeTag::OverAll);
  EXPECT_TRUE(count_temporal_features(r.domain).over_all == 0);
  EXPECT_EQ(r.report.pass, "over-all");
  EXPECT_NE(std::find(r.report.synthesized.begin(), r.report.synthesized.end(), "ongoing-load-truck"),
            r.report.synthesized.end());
}

TEST(OverAllTest, ProgressiveIsAddedAtStartAndDeletedAtEnd) {
  Domain d = load_domain("figure1/domain.pddl");
  LoweringResult r = lower_over_all(d);
  const ActionSchema* load = r.domain.find_action("load-truck");
  ASSERT_NE(load, nullptr);
  Atom progressive{"ongoing-load-truck", {Term::var("?t")}};
  bool added = false;
  bool deleted = false;
  for (const auto& e : load->effects) {
    if (e.tag == TimeTag::AtStart && e.effect == Effect::add(progressive)) added = true;
    if (e.tag == TimeTag::AtEnd && e.effect == Effect::del(progressive)) deleted = true;
  }
  EXPECT_TRUE(added);
  EXPECT_TRUE(deleted);
}

TEST(OverAllTest, ConditionalInterfererIsStillBlocked) {
  Domain d = load_domain("micro/overblock/domain.pddl");
  LoweringResult r = lower_over_all(d);
  EXPECT_EQ(precondition_of(r.domain, "reset"), "(and (open ?y) (not (ongoing-work ?y)))");
}

TEST(OverAllTest, UnresolvedParametersAreUniversallyClosed) {
  Domain d = parse_domain(kClosureDomain);
  LoweringResult r = lower_over_all(d, OverAllOptions{ProgressiveParameters::AllOccurring});
  EXPECT_EQ(precondition_of(r.domain, "spoil"), "(and (r) (forall (?s - slot) (not (ongoing-hold ?z ?s))))");
}

TEST(OverAllTest, SubjectParametersNeedNoClosure) {
  Domain d = parse_domain(kClosureDomain);
  LoweringResult r = lower_over_all(d);
  EXPECT_EQ(precondition_of(r.domain, "spoil"), "(and (r) (not (ongoing-hold ?z)))");
}

TEST(OverAllTest, SynthesizedNamesAvoidCollisions) {
  Domain d = parse_domain(R"((define (domain coll)
    (:predicates (p) (ongoing-a) (done))
    (:durative-action a :parameters () :duration (= ?duration 1)
      :condition (and (over all (p))) :effect (and (at end (done))))
    (:action b :parameters () :precondition (and) :effect (not (p)))))");
  LoweringResult r = lower_over_all(d);
  EXPECT_TRUE(has_predicate(r.domain, "ongoing-a"));
  EXPECT_TRUE(has_predicate(r.domain, "ongoing-a-2"));
  EXPECT_EQ(precondition_of(r.domain, "b"), "(not (ongoing-a-2))");
}

TEST(OverAllTest, OutputRoundTrips) {
  for (const char* name : {"figure1", "figure4", "micro/overblock"}) {
    Domain d = load_domain(std::string(name) + "/domain.pddl");
    Domain lowered = lower_over_all(d).domain;
    EXPECT_EQ(parse_domain(print_domain(lowered)), lowered) << name;
  }
}

TEST(AtEndTest, Figure2FailureMarkerAndGoal) {
  Domain d = load_domain("figure2/domain.pddl");
  Problem p = load_problem("figure2/problem.pddl", d);
  AtEndResult r = lower_at_end_conditions(d, p);
  const PredicateDecl* failed = r.domain.find_predicate("failed-load-truck");
  ASSERT_NE(failed, nullptr);
  ASSERT_EQ(failed->parameters.size(), 2u);
  EXPECT_EQ(failed->parameters[0].type, "crane");
  EXPECT_EQ(failed->parameters[1].type, "cargo");
  EXPECT_EQ(count_temporal_features(r.domain).at_end_conditions, 0u);
  EXPECT_EQ(print_formula(r.problem.goal),
            "(and (in crate1 truck1) (forall (?c - crane ?o - cargo) (not (failed-load-truck ?c ?o))))");
}

TEST(AtEndTest, Figure2EffectsAreGuarded) {
  Domain d = load_domain("figure2/domain.pddl");
  Problem p = load_problem("figure2/problem.pddl", d);
  AtEndResult r = lower_at_end_conditions(d, p);
  const ActionSchema* a = r.domain.find_action("load-truck");
  ASSERT_NE(a, nullptr);
  std::vector<std::string> at_end;
  for (const auto& e : a->effects) {
    if (e.tag == TimeTag::AtEnd) at_end.push_back(print_effect(e.effect));
  }
  auto contains = [&](const std::string& s) { return std::find(at_end.begin(), at_end.end(), s) != at_end.end(); };
  EXPECT_TRUE(contains("(not (loading ?t))"));
  EXPECT_TRUE(contains("(when (holding ?c ?o) (in ?o ?t))"));
  EXPECT_TRUE(contains("(when (holding ?c ?o) (not (holding ?c ?o)))"));
  EXPECT_TRUE(contains("(when (not (holding ?c ?o)) (failed-load-truck ?c ?o))"));
  EXPECT_EQ(at_end.size(), 4u);
}

TEST(AtEndTest, DomainWithoutEndConditionsIsUnchanged) {
  Domain d = load_domain("figure1/domain.pddl");
  Problem p = load_problem("figure1/problem.pddl", d);
  AtEndResult r = lower_at_end_conditions(d, p);
  EXPECT_EQ(r.domain, d);
  EXPECT_EQ(r.problem, p);
}

TEST(DurationRangeTest, MissingAnnotationIsAnError) {
  Domain d = load_domain("figure3/domain.pddl");
  try {
    lower_duration_range(d, {});
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("burnmatch"), std::string::npos);
  }
}

TEST(DurationRangeTest, Figure3SplitsIntoStartAndStop) {
  Domain d = load_domain("figure3/domain.pddl");
  LoweringResult r = lower_duration_range(d, testing::load_rates("figure3/rates.pddl", d));
  const ActionSchema* start = r.domain.find_action("burnmatch-start");
  const ActionSchema* stop = r.domain.find_action("burnmatch-stop");
  ASSERT_NE(start, nullptr);
  ASSERT_NE(stop, nullptr);
  EXPECT_EQ(r.domain.find_action("burnmatch"), nullptr);
  ASSERT_TRUE(start->duration);
  EXPECT_EQ(start->duration->form, DurationSpec::Form::Fixed);
  EXPECT_FALSE(stop->is_durative());
  EXPECT_EQ(count_temporal_features(r.domain).range_durations, 0u);
  ASSERT_EQ(r.report.range_mappings.size(), 1u);
  EXPECT_EQ(r.report.range_mappings[0].original, "burnmatch");
  EXPECT_EQ(r.report.range_mappings[0].timestamp_parameters, 0u);
}

TEST(DurationRangeTest, Figure4StopTakesTimestampParameter) {
  Domain d = load_domain("figure4/domain.pddl");
  LoweringResult r = lower_duration_range(d, testing::load_rates("figure4/rates.pddl", d));
  const ActionSchema* stop = r.domain.find_action("heat-water-stop");
  ASSERT_NE(stop, nullptr);
  ASSERT_EQ(stop->parameters.size(), 2u);
  EXPECT_EQ(stop->parameters[1].type, "time");
  EXPECT_NE(r.domain.find_function("started-heat-water-temperature"), nullptr);
  ASSERT_EQ(r.report.range_mappings.size(), 1u);
  EXPECT_EQ(r.report.range_mappings[0].timestamp_parameters, 1u);
}

TEST(SynthDefsTest, StationaryGroupReplacesNegatedMembers) {
  Domain d = load_domain("stationary/domain.pddl");
  LoweringResult r = synthesize_definitions(d, testing::load_groups("stationary/groups.pddl", d));
  const Definition* def = r.domain.find_definition("must-be-stationary");
  ASSERT_NE(def, nullptr);
  EXPECT_EQ(print_formula(def->body), "(or (loading ?t) (changing-tire ?t) (repairing ?t) (refueling ?t))");
  EXPECT_EQ(precondition_of(r.domain, "move-truck"), "(and (at ?t ?from) (not (must-be-stationary ?t)))");
}

TEST(SynthDefsTest, MembersMustMatchGroupArity) {
  Domain d = load_domain("stationary/domain.pddl");
  DefinitionGroup bad{"g", {{"?t", "truck"}}, {"at"}};
  EXPECT_THROW(synthesize_definitions(d, {bad}), ModelError);
}

TEST(ExpandDefsTest, RestoresStationaryPrecondition) {
  Domain d = load_domain("stationary/domain.pddl");
  Domain synthesized = synthesize_definitions(d, testing::load_groups("stationary/groups.pddl", d)).domain;
  Domain expanded = expand_definitions(synthesized);
  EXPECT_TRUE(expanded.definitions.empty());
  EXPECT_EQ(precondition_of(expanded, "move-truck"),
            "(and (at ?t ?from) (not (loading ?t)) (not (changing-tire ?t)) (not (repairing ?t)) (not (refueling ?t)))");
}

TEST(ExpandDefsTest, TruthTableMatchesDefinitions) {
  Domain d = parse_domain(R"((define (domain defs)
    (:predicates (p ?x) (q ?x) (r ?x))
    (:derived (d1 ?x) (or (p ?x) (q ?x)))
    (:derived (d2 ?x) (and (d1 ?x) (not (r ?x))))
    (:derived (d3) (exists (?y) (and (d2 ?y) (forall (?z) (or (d1 ?z) (r ?z))))))))");
  Problem p = parse_problem("(define (problem defs-1) (:domain defs) (:objects a b) (:init) (:goal (and)))", d);
  EvalContext ctx(d, p);
  Domain plain = expand_definitions(d);
  EvalContext plain_ctx(plain, p);
  std::vector<Formula> probes;
  for (const char* text : {"(d1 a)", "(d2 b)", "(d3)", "(not (d3))", "(or (d2 a) (not (d1 b)))"}) {
    Problem probe = parse_problem(
        std::string("(define (problem x) (:domain defs) (:objects a b) (:init) (:goal ") + text + "))", d);
    probes.push_back(probe.goal);
  }
  std::vector<Atom> atoms;
  for (const char* pred : {"p", "q", "r"}) {
    for (const char* obj : {"a", "b"}) atoms.push_back(Atom{pred, {Term::obj(obj)}});
  }
  for (unsigned mask = 0; mask < (1u << atoms.size()); ++mask) {
    TimedState s;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (mask & (1u << i)) s.atoms.insert(atoms[i]);
    }
    for (const auto& f : probes) {
      Formula expanded = expand_definitions(d, f);
      EXPECT_EQ(holds(s, f, ctx), holds(s, expanded, plain_ctx)) << print_formula(f) << " mask " << mask;
    }
  }
}

TEST(PipelineTest, RunsInFixedOrderRegardlessOfRequest) {
  Domain d = load_domain("figure1/domain.pddl");
  Problem p = load_problem("figure1/problem.pddl", d);
  PipelineInput in;
  in.passes = {Pass::ExpandDefs, Pass::AtEnd, Pass::OverAll};
  PipelineResult r = run_pipeline(d, p, in);
  ASSERT_EQ(r.reports.size(), 3u);
  EXPECT_EQ(r.reports[0].pass, "over-all");
  EXPECT_EQ(r.reports[1].pass, "at-end");
  EXPECT_EQ(r.reports[2].pass, "expand-defs");
}

TEST(PipelineTest, PassNamesRoundTrip) {
  for (Pass pass : default_pipeline()) EXPECT_EQ(parse_pass_name(pass_name(pass)), pass);
  EXPECT_FALSE(parse_pass_name("bogus"));
  std::vector<Pass> expected{Pass::DurationRange, Pass::OverAll, Pass::AtEnd, Pass::SynthDefs, Pass::ExpandDefs};
  EXPECT_EQ(default_pipeline(), expected);
}

TEST(PipelineTest, EveryCorpusInstanceBecomesMarkovian) {
  for (const auto& inst : testing::corpus_instances()) {
    SCOPED_TRACE(inst.name);
    Problem p = inst.problem.value_or(Problem{});
    if (!inst.problem) p.goal = Formula::truth();
    PipelineResult r = run_pipeline(inst.domain, p, inst.pipeline_input());
    EXPECT_TRUE(count_temporal_features(r.domain).markovian());
    EXPECT_TRUE(r.domain.definitions.empty());
    EXPECT_EQ(parse_domain(print_domain(r.domain)), r.domain);
  }
}

TEST(PipelineTest, IsDeterministic) {
  Domain d = load_domain("figure4/domain.pddl");
  Problem p = load_problem("figure4/problem.pddl", d);
  PipelineInput in;
  in.rates = testing::load_rates("figure4/rates.pddl", d);
  EXPECT_EQ(print_domain(run_pipeline(d, p, in).domain), print_domain(run_pipeline(d, p, in).domain));
}

}  // namespace
}  // namespace tempolower
