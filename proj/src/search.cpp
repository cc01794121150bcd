#include "tempolower/search.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "tempolower/printer.hpp"

namespace tempolower {

const char* outcome_name(SearchOutcome o) {
  switch (o) {
    case SearchOutcome::Found: return "found";
    case SearchOutcome::ProvenNone: return "proven-none";
    case SearchOutcome::BoundExceeded: return "bound-exceeded";
  }
  return "?";
}

namespace {

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind == Formula::Kind::And) return f.children;
  return {f};
}

/// The fluent whose value a time-typed parameter must equal, if linked.
std::optional<Atom> linked_fluent(const ActionSchema& a, const std::string& var) {
  for (const auto& c : conjuncts(a.start_condition())) {
    if (c.kind != Formula::Kind::Compare || c.op != CompareOp::Eq) continue;
    const NumericExpr& l = c.operands[0];
    const NumericExpr& r = c.operands[1];
    if (l.kind == NumericExpr::Kind::Fluent && r.kind == NumericExpr::Kind::Variable && r.variable == var) {
      return l.fluent;
    }
    if (r.kind == NumericExpr::Kind::Fluent && l.kind == NumericExpr::Kind::Variable && l.variable == var) {
      return r.fluent;
    }
  }
  return std::nullopt;
}

void enumerate(const ActionSchema& a, const World& w, const EvalContext& ctx, std::size_t index,
               Binding& binding, std::vector<GroundAction>& out) {
  if (index == a.parameters.size()) {
    Binding full = binding;
    for (const auto& p : a.parameters) {
      if (!is_numeric_type(p.type)) continue;
      auto fluent = linked_fluent(a, p.name);
      if (!fluent) return;
      Atom ground = rename(*fluent, full);
      auto it = w.state.fluents.find(ground);
      if (it == w.state.fluents.end()) return;
      full[p.name] = Term::num(it->second);
    }
    GroundAction g{&a, {}, full};
    for (const auto& p : a.parameters) g.args.push_back(full.at(p.name));
    out.push_back(std::move(g));
    return;
  }
  const TypedVar& p = a.parameters[index];
  if (is_numeric_type(p.type)) {
    enumerate(a, w, ctx, index + 1, binding, out);
    return;
  }
  for (const auto& obj : ctx.objects_of(p.type)) {
    binding[p.name] = Term::obj(obj);
    enumerate(a, w, ctx, index + 1, binding, out);
  }
  binding.erase(p.name);
}

}  // namespace

std::vector<GroundAction> ground_candidates(const World& w, const EvalContext& ctx) {
  std::vector<GroundAction> out;
  for (const auto& a : ctx.domain().actions) {
    Binding binding;
    enumerate(a, w, ctx, 0, binding, out);
  }
  return out;
}

std::vector<std::optional<Rational>> duration_candidates(const World& w, const GroundAction& a) {
  auto bounds = duration_bounds(w, a);
  if (!bounds) return {std::nullopt};
  if (a.schema->duration->form == DurationSpec::Form::Fixed) return {bounds->lo};
  std::vector<Rational> values{bounds->lo, bounds->hi};
  for (const auto& e : w.queue.events()) {
    Rational d = e.time - w.state.clock;
    if (d >= bounds->lo && d <= bounds->hi) values.push_back(d);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<std::optional<Rational>> out;
  for (auto& v : values) {
    if (v >= 0 && v >= bounds->lo && v <= bounds->hi) out.emplace_back(v);
  }
  return out;
}

std::vector<std::pair<Move, World>> successors(const World& w, const EvalContext& ctx, const Rational& horizon) {
  std::vector<std::pair<Move, World>> out;
  if (w.state.clock > horizon) return out;
  for (auto& g : ground_candidates(w, ctx)) {
    std::vector<std::optional<Rational>> durations;
    try {
      durations = duration_candidates(w, g);
    } catch (const SimulationError&) {
      continue;
    }
    for (const auto& d : durations) {
      if (d && w.state.clock + *d > horizon) continue;
      World next = w;
      try {
        apply_action(next, g, d, ctx);
        advance_time(next, next.state.clock, ctx, true);
      } catch (const SimulationError&) {
        continue;
      }
      out.emplace_back(Move{g, d}, std::move(next));
    }
  }
  return out;
}

bool goal_reached(const World& w, const EvalContext& ctx) {
  World end = w;
  try {
    drain(end, ctx);
    return holds(end.state, ctx.problem().goal, ctx);
  } catch (const SimulationError&) {
    return false;
  }
}

SearchResult plan_search(const Domain& d, const Problem& p, Mode mode, const SearchBounds& bounds) {
  SearchResult result;
  if (p.objects.size() > bounds.max_objects) {
    result.outcome = SearchOutcome::BoundExceeded;
    result.note = std::to_string(p.objects.size()) + " objects exceed the bound of " +
                  std::to_string(bounds.max_objects);
    return result;
  }
  if (mode == Mode::Lowered && !count_temporal_features(d).markovian()) {
    throw ModelError("lowered mode needs a domain without over-all conditions, at-end conditions or "
                     "duration ranges; lower it first or use pddl21 mode");
  }

  EvalContext ctx(d, p);
  struct Node {
    World world;
    Plan plan;
  };
  std::deque<Node> frontier;
  frontier.push_back({initial_world(p, mode), {}});
  std::unordered_set<std::string> closed;

  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (bounds.prune_duplicates && !closed.insert(node.world.canonical()).second) continue;
    if (++result.expanded > bounds.max_nodes) {
      result.outcome = SearchOutcome::BoundExceeded;
      result.note = "node limit of " + std::to_string(bounds.max_nodes) + " reached";
      return result;
    }
    if (goal_reached(node.world, ctx)) {
      result.outcome = SearchOutcome::Found;
      result.plan = std::move(node.plan);
      return result;
    }

    if (auto next = node.world.queue.next_time()) {
      World waited = node.world;
      bool ok = true;
      try {
        advance_time(waited, *next, ctx, true);
      } catch (const SimulationError&) {
        ok = false;
      }
      if (ok) frontier.push_front({std::move(waited), node.plan});
    }

    if (node.plan.size() >= bounds.max_steps) continue;
    for (auto& [move, world] : successors(node.world, ctx, bounds.horizon)) {
      Plan plan = node.plan;
      plan.push_back(PlanStep{node.world.state.clock, move.action.schema->name, move.action.args, move.duration, 0});
      frontier.push_back({std::move(world), std::move(plan)});
    }
  }
  result.outcome = SearchOutcome::ProvenNone;
  result.note = "no plan within horizon " + format_rational(bounds.horizon) + " and " +
                std::to_string(bounds.max_steps) + " steps";
  return result;
}

Plan map_plan(const Domain& original, const Problem& p, const Plan& plan,
              const std::vector<RangeMapping>& mappings, std::vector<std::string>* notes) {
  EvalContext ctx(original, p);
  World w = initial_world(p, Mode::Pddl21);
  bool simulating = true;
  auto note = [&](const std::string& text) {
    if (notes != nullptr) notes->push_back(text);
  };

  Plan out;
  for (const auto& step : plan) {
    auto mapping = std::find_if(mappings.begin(), mappings.end(),
                                [&](const RangeMapping& m) { return m.original == step.action; });
    std::optional<Rational> hi;
    if (simulating) {
      try {
        advance_time(w, step.time, ctx, true);
        GroundAction g = ground_action(ctx, step.action, step.args);
        if (auto b = duration_bounds(w, g)) hi = b->hi;
        apply_action(w, g, step.duration, ctx);
      } catch (const SimulationError& e) {
        note(std::string("original plan stops simulating: ") + e.what());
        simulating = false;
      }
    }
    if (mapping == mappings.end()) {
      out.push_back(step);
      continue;
    }
    PlanStep start{step.time, mapping->start, step.args, std::nullopt, step.line};
    out.push_back(start);
    if (!step.duration) {
      note(step.label() + " has no duration; mapped to its start only");
      continue;
    }
    if (hi && *step.duration == *hi) {
      note(step.label() + " runs for its maximum " + format_rational(*hi) + "; mapped to " + start.label() +
           " with the default completion");
      continue;
    }
    PlanStep stop{step.time + *step.duration, mapping->stop, step.args, std::nullopt, step.line};
    for (std::size_t i = 0; i < mapping->timestamp_parameters; ++i) stop.args.push_back(Term::num(step.time));
    note(step.label() + " [" + format_rational(*step.duration) + "] mapped to " + start.label() + "@" +
         format_rational(step.time) + " and " + stop.label() + "@" + format_rational(stop.time));
    out.push_back(stop);
  }
  std::stable_sort(out.begin(), out.end(), [](const PlanStep& a, const PlanStep& b) { return a.time < b.time; });
  return out;
}

EquivalenceVerdict check_equivalence(const std::string& instance, const Domain& original_domain,
                                     const Problem& original_problem, const Domain& lowered_domain,
                                     const Problem& lowered_problem,
                                     const std::vector<LoweringReport>& reports, const SearchBounds& bounds) {
  EquivalenceVerdict v;
  v.instance = instance;
  v.original = plan_search(original_domain, original_problem, Mode::Pddl21, bounds);
  v.lowered = plan_search(lowered_domain, lowered_problem, Mode::Lowered, bounds);

  if (v.original.outcome == SearchOutcome::BoundExceeded || v.lowered.outcome == SearchOutcome::BoundExceeded) {
    v.notes.push_back("inconclusive: " +
                      (v.original.outcome == SearchOutcome::BoundExceeded ? v.original.note : v.lowered.note));
  } else {
    v.agree = v.original_solvable() == v.lowered_solvable();
  }

  if (v.original_solvable()) {
    std::vector<RangeMapping> mappings;
    for (const auto& r : reports) mappings.insert(mappings.end(), r.range_mappings.begin(), r.range_mappings.end());
    v.mapped_plan = map_plan(original_domain, original_problem, v.original.plan, mappings, &v.notes);
    try {
      v.mapped_report = validate_plan(lowered_domain, lowered_problem, *v.mapped_plan, Mode::Lowered);
      v.notes.push_back(std::string("mapped plan is ") + (v.mapped_report->valid ? "valid" : "invalid") +
                        " on the lowered model");
    } catch (const ModelError& e) {
      v.notes.push_back(std::string("mapped plan could not be validated: ") + e.what());
    }
  }

  if (v.agree && !*v.agree && v.original_solvable()) {
    for (const auto& r : reports) {
      for (const auto& [action, formula] : r.added_preconditions) {
        v.notes.push_back("interference guard " + formula + " on " + action + " may over-block");
      }
    }
  }
  return v;
}

}  // namespace tempolower
