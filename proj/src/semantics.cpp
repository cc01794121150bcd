#include "tempolower/semantics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tempolower/lowering.hpp"
#include "tempolower/printer.hpp"

namespace tempolower {

const char* mode_name(Mode m) { return m == Mode::Pddl21 ? "pddl21" : "lowered"; }

std::optional<Mode> parse_mode(const std::string& name) {
  if (name == "pddl21") return Mode::Pddl21;
  if (name == "lowered") return Mode::Lowered;
  return std::nullopt;
}

std::string TimedState::canonical() const {
  std::string out = "clock " + format_rational(clock) + "\natoms";
  for (const auto& a : atoms) out += " " + a.str();
  out += "\nfluents";
  for (const auto& [f, v] : fluents) out += " " + f.str() + "=" + format_rational(v);
  return out + "\n";
}

void EventQueue::push(Event e) {
  auto pos = std::upper_bound(events_.begin(), events_.end(), e, [](const Event& a, const Event& b) {
    return a.time < b.time || (a.time == b.time && a.sequence < b.sequence);
  });
  events_.insert(pos, std::move(e));
}

std::optional<Rational> EventQueue::next_time() const {
  if (events_.empty()) return std::nullopt;
  return events_.front().time;
}

std::vector<Event> EventQueue::pop_batch(const Rational& limit, bool inclusive) {
  std::vector<Event> batch;
  if (events_.empty()) return batch;
  Rational t = events_.front().time;
  if (inclusive ? t > limit : t >= limit) return batch;
  auto end = std::find_if(events_.begin(), events_.end(), [&](const Event& e) { return e.time != t; });
  batch.assign(std::make_move_iterator(events_.begin()), std::make_move_iterator(end));
  events_.erase(events_.begin(), end);
  return batch;
}

SimulationError::SimulationError(Violation v)
    : std::runtime_error(v.kind + " violation at t=" + format_rational(v.time) + ": " + v.culprit +
                         (v.detail.empty() ? "" : " (" + v.detail + ")")),
      violation_(std::move(v)) {}

EvalContext::EvalContext(const Domain& domain, const Problem& problem)
    : domain_(&domain), problem_(&problem) {}

const std::vector<std::string>& EvalContext::objects_of(const std::string& type) const {
  auto it = by_type_.find(type);
  if (it != by_type_.end()) return it->second;
  std::vector<std::string> objects;
  for (const auto& o : problem_->objects) {
    if (domain_->is_subtype(o.type, type)) objects.push_back(o.name);
  }
  return by_type_.emplace(type, std::move(objects)).first->second;
}

std::string GroundAction::label() const {
  std::string out = "(" + schema->name;
  for (const auto& a : args) out += " " + a.str();
  return out + ")";
}

GroundAction ground_action(const EvalContext& ctx, const std::string& name, const std::vector<Term>& args) {
  const ActionSchema* schema = ctx.domain().find_action(name);
  if (schema == nullptr) throw ModelError("unknown action " + name, {}, name);
  if (args.size() != schema->parameters.size()) {
    throw ModelError("action " + name + " takes " + std::to_string(schema->parameters.size()) +
                         " arguments, got " + std::to_string(args.size()),
                     {}, name);
  }
  GroundAction g{schema, args, {}};
  for (std::size_t i = 0; i < args.size(); ++i) {
    const TypedVar& p = schema->parameters[i];
    const Term& arg = args[i];
    if (is_numeric_type(p.type)) {
      if (arg.kind != Term::Kind::Number) {
        throw ModelError("argument " + std::to_string(i + 1) + " of " + name + " must be a number",
                         {}, arg.str());
      }
    } else {
      const TypedVar* obj = arg.kind == Term::Kind::Object ? ctx.problem().find_object(arg.name) : nullptr;
      if (obj == nullptr) throw ModelError("unknown object " + arg.str() + " in " + name, {}, arg.str());
      if (!ctx.domain().is_subtype(obj->type, p.type)) {
        throw ModelError("object " + obj->name + " of type " + obj->type + " does not fit parameter " +
                             p.name + " - " + p.type + " of " + name,
                         {}, obj->name);
      }
    }
    g.binding[p.name] = arg;
  }
  return g;
}

TimedState initial_state(const Problem& p) {
  TimedState s;
  s.atoms.insert(p.init_atoms.begin(), p.init_atoms.end());
  for (const auto& [f, v] : p.init_fluents) s.fluents[f] = v;
  return s;
}

namespace {

[[noreturn]] void evaluation_error(const TimedState& s, const std::string& culprit, const std::string& detail) {
  throw SimulationError(Violation{"evaluation", s.clock, culprit, detail});
}

}  // namespace

Rational evaluate(const TimedState& s, const NumericExpr& e) {
  using K = NumericExpr::Kind;
  switch (e.kind) {
    case K::Number: return e.value;
    case K::CurrentTime: return s.clock;
    case K::Variable: evaluation_error(s, e.variable, "unbound variable");
    case K::Fluent: {
      auto it = s.fluents.find(e.fluent);
      if (it == s.fluents.end()) evaluation_error(s, e.fluent.str(), "fluent has no value");
      return it->second;
    }
    case K::Negate: return -evaluate(s, e.operands.front());
    case K::Add: return evaluate(s, e.operands[0]) + evaluate(s, e.operands[1]);
    case K::Sub: return evaluate(s, e.operands[0]) - evaluate(s, e.operands[1]);
    case K::Mul: return evaluate(s, e.operands[0]) * evaluate(s, e.operands[1]);
    case K::Div: {
      Rational den = evaluate(s, e.operands[1]);
      if (den == 0) evaluation_error(s, print_expr(e), "division by zero");
      return evaluate(s, e.operands[0]) / den;
    }
  }
  return 0;
}

namespace {

bool quantify(const TimedState& s, const std::vector<TypedVar>& vars, const Formula& body,
              const EvalContext& ctx, std::size_t index, bool universal) {
  if (index == vars.size()) return holds(s, body, ctx);
  const TypedVar& v = vars[index];
  if (is_numeric_type(v.type)) evaluation_error(s, v.name, "cannot quantify over numbers");
  for (const auto& obj : ctx.objects_of(v.type)) {
    Formula inner = rename(body, Binding{{v.name, Term::obj(obj)}});
    if (quantify(s, vars, inner, ctx, index + 1, universal) != universal) return !universal;
  }
  return universal;
}

bool compare(CompareOp op, const Rational& a, const Rational& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

bool holds(const TimedState& s, const Formula& f, const EvalContext& ctx) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom:
      for (const auto& t : f.atom.args) {
        if (t.is_variable()) evaluation_error(s, f.atom.str(), "unbound variable " + t.name);
      }
      return s.atoms.count(f.atom) != 0;
    case K::Defined: {
      const Definition* def = ctx.domain().find_definition(f.atom.predicate);
      if (def == nullptr) evaluation_error(s, f.atom.str(), "unknown definition");
      Binding b;
      for (std::size_t i = 0; i < def->parameters.size(); ++i) b[def->parameters[i].name] = f.atom.args.at(i);
      return holds(s, substitute(def->body, b), ctx);
    }
    case K::Not: return !holds(s, f.children.front(), ctx);
    case K::And:
      return std::all_of(f.children.begin(), f.children.end(),
                         [&](const Formula& c) { return holds(s, c, ctx); });
    case K::Or:
      return std::any_of(f.children.begin(), f.children.end(),
                         [&](const Formula& c) { return holds(s, c, ctx); });
    case K::Compare: return compare(f.op, evaluate(s, f.operands[0]), evaluate(s, f.operands[1]));
    case K::Forall: return quantify(s, f.vars, f.children.front(), ctx, 0, true);
    case K::Exists: return quantify(s, f.vars, f.children.front(), ctx, 0, false);
  }
  return false;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string World::canonical() const {
  std::string out = state.canonical();
  out += "events";
  for (const auto& e : queue.events()) {
    out += " [" + format_rational(e.time);
    for (const auto& eff : e.effects) out += " " + print_effect(eff);
    out += "]";
  }
  out += "\nactive";
  for (const auto& r : active) {
    out += " [" + r.action + " " + format_rational(r.start) + " " + format_rational(r.end);
    for (const auto& f : r.over_all) out += " " + print_formula(f);
    out += " " + print_formula(r.at_end) + "]";
  }
  return out + "\n";
}

std::string World::digest() const { return fnv1a_hex(canonical()); }

World initial_world(const Problem& p, Mode mode) {
  World w;
  w.mode = mode;
  w.state = initial_state(p);
  return w;
}

namespace {

/// Primitive changes of one simultaneous set of effects, evaluated on the
/// state before any of them applies.
class ChangeSet {
 public:
  ChangeSet(const TimedState& pre, const EvalContext& ctx) : pre_(pre), ctx_(ctx) {}

  void collect(const Effect& e, const std::string& source) {
    switch (e.kind) {
      case Effect::Kind::Add: literal(e.atom, true, source); break;
      case Effect::Kind::Delete: literal(e.atom, false, source); break;
      case Effect::Kind::Assign: numeric(e.atom, false, evaluate(pre_, e.value), source); break;
      case Effect::Kind::Increase: numeric(e.atom, true, evaluate(pre_, e.value), source); break;
      case Effect::Kind::Timestamp: numeric(e.atom, false, pre_.clock, source); break;
      case Effect::Kind::When:
        if (holds(pre_, e.condition, ctx_)) {
          for (const auto& t : e.then) collect(t, source);
        }
        break;
    }
  }

  void commit(TimedState& s) const {
    for (const auto& [atom, change] : literals_) {
      if (!change.add) s.atoms.erase(atom);
    }
    for (const auto& [atom, change] : literals_) {
      if (change.add) s.atoms.insert(atom);
    }
    for (const auto& [fluent, change] : numerics_) {
      if (change.increase) {
        auto it = s.fluents.find(fluent);
        if (it == s.fluents.end()) evaluation_error(s, fluent.str(), "increase of a fluent without a value");
        it->second += change.value;
      } else {
        s.fluents[fluent] = change.value;
      }
    }
  }

 private:
  struct LiteralChange {
    bool add;
    std::string source;
  };
  struct NumericChange {
    bool increase;
    Rational value;
    std::string source;
  };

  [[noreturn]] void conflict(const std::string& what, const std::string& a, const std::string& b) const {
    std::string culprit = a == b ? a : a + " and " + b;
    throw SimulationError(Violation{"effect-conflict", pre_.clock, culprit, what});
  }

  void literal(const Atom& atom, bool add, const std::string& source) {
    auto [it, inserted] = literals_.emplace(atom, LiteralChange{add, source});
    if (!inserted && it->second.add != add) {
      conflict("both adds and deletes " + atom.str(), it->second.source, source);
    }
  }

  void numeric(const Atom& fluent, bool increase, const Rational& value, const std::string& source) {
    auto [it, inserted] = numerics_.emplace(fluent, NumericChange{increase, value, source});
    if (inserted) return;
    NumericChange& prior = it->second;
    if (increase && prior.increase) {
      prior.value += value;
    } else if (increase || prior.increase || prior.value != value) {
      conflict("conflicting updates of " + fluent.str(), prior.source, source);
    }
  }

  const TimedState& pre_;
  const EvalContext& ctx_;
  std::map<Atom, LiteralChange> literals_;
  std::map<Atom, NumericChange> numerics_;
};

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind == Formula::Kind::And) return f.children;
  return {f};
}

void check_over_all(const World& w, const std::string& cause, const EvalContext& ctx) {
  if (w.mode != Mode::Pddl21) return;
  for (const auto& r : w.active) {
    for (const auto& f : r.over_all) {
      if (!holds(w.state, f, ctx)) {
        throw SimulationError(Violation{"over-all", w.state.clock, cause,
                                        print_formula(f) + " must hold throughout " + r.action});
      }
    }
  }
}

void fire_batch(World& w, std::vector<Event> batch, const EvalContext& ctx) {
  if (w.mode == Mode::Pddl21) {
    for (const auto& e : batch) {
      auto it = std::find_if(w.active.begin(), w.active.end(),
                             [&](const ActiveRecord& r) { return r.event == e.sequence; });
      if (it == w.active.end()) continue;
      if (!holds(w.state, it->at_end, ctx)) {
        throw SimulationError(Violation{"at-end", w.state.clock, it->action,
                                        print_formula(it->at_end) + " must hold at the end"});
      }
      w.active.erase(it);
    }
  }
  ChangeSet changes(w.state, ctx);
  for (const auto& e : batch) {
    for (const auto& eff : e.effects) changes.collect(eff, e.source);
  }
  changes.commit(w.state);
  std::string cause = batch.size() == 1 ? "end of " + batch.front().source : "events at t=" + format_rational(w.state.clock);
  check_over_all(w, cause, ctx);
}

}  // namespace

std::optional<DurationBounds> duration_bounds(const World& w, const GroundAction& a) {
  const auto& spec = a.schema->duration;
  if (!spec) return std::nullopt;
  if (spec->form == DurationSpec::Form::Fixed) {
    Rational v = evaluate(w.state, substitute(spec->value, a.binding));
    return DurationBounds{v, v};
  }
  return DurationBounds{evaluate(w.state, substitute(spec->lo, a.binding)),
                        evaluate(w.state, substitute(spec->hi, a.binding))};
}

void apply_action(World& w, const GroundAction& a, const std::optional<Rational>& duration,
                  const EvalContext& ctx) {
  const ActionSchema& schema = *a.schema;
  std::string label = a.label();
  const Rational now = w.state.clock;

  for (const auto& part : conjuncts(substitute(schema.start_condition(), a.binding))) {
    if (!holds(w.state, part, ctx)) {
      throw SimulationError(Violation{"precondition", now, label, print_formula(part) + " is false"});
    }
  }

  std::optional<Rational> d;
  if (auto bounds = duration_bounds(w, a)) {
    if (schema.duration->form == DurationSpec::Form::Range && !duration) {
      throw SimulationError(Violation{"duration", now, label, "a duration in [" + format_rational(bounds->lo) +
                                                                  ", " + format_rational(bounds->hi) +
                                                                  "] is required"});
    }
    d = duration.value_or(bounds->lo);
    if (*d < bounds->lo || *d > bounds->hi || *d < 0) {
      std::string allowed = bounds->lo == bounds->hi
                                ? format_rational(bounds->lo)
                                : "[" + format_rational(bounds->lo) + ", " + format_rational(bounds->hi) + "]";
      throw SimulationError(Violation{"duration", now, label,
                                      "duration " + format_rational(*d) + " outside " + allowed});
    }
  } else if (duration) {
    throw SimulationError(Violation{"duration", now, label, "instantaneous action given a duration"});
  }

  ChangeSet changes(w.state, ctx);
  std::vector<Effect> end_effects;
  Binding end_binding = a.binding;
  if (d) end_binding[kDurationVar] = Term::num(*d);
  for (const auto& te : schema.effects) {
    if (te.tag == TimeTag::AtStart) {
      changes.collect(substitute(te.effect, a.binding), label);
    } else if (te.tag == TimeTag::AtEnd) {
      end_effects.push_back(substitute(te.effect, end_binding));
    }
  }
  changes.commit(w.state);

  if (d) {
    std::uint64_t seq = w.next_sequence++;
    std::string source = label + "@" + format_rational(now);
    w.queue.push(Event{now + *d, seq, source, std::move(end_effects)});
    if (w.mode == Mode::Pddl21) {
      ActiveRecord r;
      r.action = source;
      r.start = now;
      r.end = now + *d;
      Formula over_all = substitute(schema.condition_at(TimeTag::OverAll), end_binding);
      if (!over_all.is_true()) r.over_all = conjuncts(over_all);
      r.at_end = substitute(schema.condition_at(TimeTag::AtEnd), end_binding);
      r.event = seq;
      w.active.push_back(std::move(r));
    }
  }
  check_over_all(w, label, ctx);
}

void advance_time(World& w, const Rational& t, const EvalContext& ctx, bool inclusive) {
  if (t < w.state.clock) {
    throw ModelError("cannot advance time backwards from " + format_rational(w.state.clock) + " to " +
                     format_rational(t));
  }
  while (true) {
    std::vector<Event> batch = w.queue.pop_batch(t, inclusive);
    if (batch.empty()) break;
    w.state.clock = batch.front().time;
    fire_batch(w, std::move(batch), ctx);
  }
  w.state.clock = t;
}

void drain(World& w, const EvalContext& ctx) {
  while (auto next = w.queue.next_time()) advance_time(w, *next, ctx, true);
}

ValidationReport validate_plan(const Domain& d, const Problem& p, const Plan& plan, Mode mode) {
  if (mode == Mode::Lowered) {
    TemporalFeatures features = count_temporal_features(d);
    if (!features.markovian()) {
      throw ModelError("lowered mode needs a domain without over-all conditions, at-end conditions or "
                       "duration ranges (found " +
                       std::to_string(features.over_all) + ", " + std::to_string(features.at_end_conditions) +
                       ", " + std::to_string(features.range_durations) + "); lower it first or use pddl21 mode");
    }
  }
  EvalContext ctx(d, p);
  std::vector<GroundAction> steps;
  Rational last = 0;
  for (const auto& step : plan) {
    if (step.time < last) {
      throw ModelError("plan steps are not sorted by time at line " + std::to_string(step.line));
    }
    last = step.time;
    try {
      steps.push_back(ground_action(ctx, step.action, step.args));
    } catch (const ModelError& e) {
      if (step.line > 0) throw ModelError("plan line " + std::to_string(step.line) + ": " + e.message(), e.span(), e.token());
      throw;
    }
  }

  ValidationReport report;
  report.mode = mode;
  World w = initial_world(p, mode);
  try {
    for (std::size_t i = 0; i < plan.size(); ++i) {
      advance_time(w, plan[i].time, ctx);
      apply_action(w, steps[i], plan[i].duration, ctx);
      report.trace.push_back({plan[i].time, steps[i].label(), w.digest()});
    }
    drain(w, ctx);
    report.makespan = w.state.clock;
    report.goal_holds = holds(w.state, p.goal, ctx);
    if (!report.goal_holds) {
      report.violation = Violation{"goal", w.state.clock, print_formula(p.goal), "goal is false after the plan"};
    }
  } catch (const SimulationError& e) {
    report.violation = e.violation();
    report.makespan = w.state.clock;
  }
  report.valid = !report.violation.has_value();
  return report;
}

}  // namespace tempolower
