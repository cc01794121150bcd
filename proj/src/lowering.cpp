#include "tempolower/lowering.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "tempolower/printer.hpp"

namespace tempolower {

void LoweringReport::note_modified(const std::string& action) {
  if (std::find(modified_actions.begin(), modified_actions.end(), action) == modified_actions.end()) {
    modified_actions.push_back(action);
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  if (taken.count(base) == 0) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + "-" + std::to_string(i);
    if (taken.count(candidate) == 0) return candidate;
  }
}

namespace {

std::vector<Formula> top_conjuncts(const Formula& f) {
  if (f.kind == Formula::Kind::And) return f.children;
  return {f};
}

/// Parameters of `action` that occur in `vars`, in declaration order.
std::vector<TypedVar> parameters_in(const ActionSchema& action, const std::set<std::string>& vars) {
  std::vector<TypedVar> out;
  for (const auto& p : action.parameters) {
    if (vars.count(p.name) != 0) out.push_back(p);
  }
  return out;
}

Atom atom_over(const std::string& name, const std::vector<TypedVar>& params) {
  Atom a{name, {}};
  for (const auto& p : params) a.args.push_back(Term::var(p.name));
  return a;
}

Formula closed(std::vector<TypedVar> vars, Formula body) {
  if (vars.empty()) return body;
  return Formula::forall(std::move(vars), std::move(body));
}

/// Flattens the (over all) conditions of `a` into literals.
std::vector<Literal> over_all_literals(const ActionSchema& a) {
  std::vector<Literal> out;
  for (const auto& c : a.conditions) {
    if (c.tag != TimeTag::OverAll) continue;
    for (const auto& part : top_conjuncts(c.formula)) {
      if (part.kind == Formula::Kind::Atom) {
        out.push_back({part.atom, true});
      } else if (part.is_literal()) {
        out.push_back({part.children.front().atom, false});
      } else if (!part.is_true()) {
        throw ModelError("unsupported over-all formula in action " + a.name + ": " +
                             print_formula(part) + " (only conjunctions of literals)",
                         part.span, a.name);
      }
    }
  }
  return out;
}

/// Every add/delete the action can perform, with its time, including the
/// primitives guarded by conditional effects.
std::vector<std::pair<TimeTag, Effect>> literal_effects(const ActionSchema& a) {
  std::vector<std::pair<TimeTag, Effect>> out;
  for (const auto& te : a.effects) {
    if (te.effect.kind == Effect::Kind::Add || te.effect.kind == Effect::Kind::Delete) {
      out.emplace_back(te.tag, te.effect);
    } else if (te.effect.kind == Effect::Kind::When) {
      for (const auto& t : te.effect.then) {
        if (t.kind == Effect::Kind::Add || t.kind == Effect::Kind::Delete) out.emplace_back(te.tag, t);
      }
    }
  }
  return out;
}

void collect_in_order(const Formula& f, std::set<std::string> bound, std::vector<std::string>& out) {
  auto note = [&](const std::string& v) {
    if (bound.count(v) == 0 && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  std::function<void(const NumericExpr&)> expr = [&](const NumericExpr& e) {
    if (e.kind == NumericExpr::Kind::Variable) note(e.variable);
    if (e.kind == NumericExpr::Kind::Fluent) {
      for (const auto& t : e.fluent.args) {
        if (t.is_variable()) note(t.name);
      }
    }
    for (const auto& o : e.operands) expr(o);
  };
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Defined:
      for (const auto& t : f.atom.args) {
        if (t.is_variable()) note(t.name);
      }
      break;
    case Formula::Kind::Compare:
      for (const auto& o : f.operands) expr(o);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      for (const auto& v : f.vars) bound.insert(v.name);
      collect_in_order(f.children.front(), bound, out);
      break;
    default:
      for (const auto& c : f.children) collect_in_order(c, bound, out);
      break;
  }
}

/// Free variables in order of first occurrence.
std::vector<std::string> variables_in_order(const Formula& f) {
  std::vector<std::string> out;
  collect_in_order(f, {}, out);
  return out;
}

std::string type_of(const ActionSchema& a, const std::string& var) {
  const TypedVar* p = a.find_parameter(var);
  return p != nullptr ? p->type : kObjectType;
}

}  // namespace

// ---------------------------------------------------------------------------
// Interference

std::vector<InterferenceEdge> detect_interference(const Domain& d) {
  std::vector<InterferenceEdge> edges;
  for (const auto& protector : d.actions) {
    if (!protector.is_durative()) continue;
    std::vector<Literal> protected_literals = over_all_literals(protector);
    if (protected_literals.empty()) continue;

    for (const auto& interferer : d.actions) {
      // Rename the protector's variables apart from the interferer's.
      std::set<std::string> taken;
      for (const auto& p : interferer.parameters) taken.insert(p.name);
      for (const auto& p : protector.parameters) taken.insert(p.name);
      Binding apart;
      std::map<std::string, std::string> renamed_type;
      for (const auto& p : protector.parameters) {
        std::string name = p.name;
        if (interferer.find_parameter(p.name) != nullptr) {
          name = fresh_name(p.name, taken);
          taken.insert(name);
        }
        apart[p.name] = Term::var(name);
        renamed_type[name] = p.type;
      }

      for (const auto& literal : protected_literals) {
        Literal renamed{rename(literal.atom, apart), literal.positive};
        for (const auto& [time, effect] : literal_effects(interferer)) {
          bool falsifies = literal.positive ? effect.kind == Effect::Kind::Delete
                                            : effect.kind == Effect::Kind::Add;
          if (!falsifies) continue;
          auto theta = unify(renamed.atom, effect.atom);
          if (!theta) continue;

          // Variables of incompatible types can never denote the same object.
          auto type_for = [&](const std::string& var) {
            auto it = renamed_type.find(var);
            return it != renamed_type.end() ? it->second : type_of(interferer, var);
          };
          bool compatible = true;
          for (const auto& [var, value] : *theta) {
            if (!value.is_variable()) continue;
            std::string a = type_for(var);
            std::string b = type_for(value.name);
            if (!d.is_subtype(a, b) && !d.is_subtype(b, a)) compatible = false;
          }
          if (!compatible) continue;

          edges.push_back(InterferenceEdge{protector.name, renamed, interferer.name, effect, time,
                                           *theta});
        }
      }
    }
  }
  return edges;
}

// ---------------------------------------------------------------------------
// (over all)

LoweringResult lower_over_all(const Domain& d, const OverAllOptions& options) {
  LoweringResult result{d, {}};
  LoweringReport& report = result.report;
  report.pass = pass_name(Pass::OverAll);
  Domain& out = result.domain;

  std::vector<InterferenceEdge> edges = detect_interference(d);
  std::set<std::string> taken = d.namespace_names();

  struct Progressive {
    std::string name;
    std::vector<TypedVar> params;
  };
  std::map<std::string, Progressive> progressives;

  for (auto& a : out.actions) {
    if (!a.is_durative()) continue;
    std::vector<Literal> literals = over_all_literals(a);
    bool has_over_all = std::any_of(a.conditions.begin(), a.conditions.end(),
                                    [](const TimedCondition& c) { return c.tag == TimeTag::OverAll; });
    if (!has_over_all) continue;

    std::set<std::string> vars;
    for (const auto& l : literals) {
      if (options.parameters == ProgressiveParameters::Subject) {
        if (!l.atom.args.empty() && l.atom.args.front().is_variable()) {
          vars.insert(l.atom.args.front().name);
        }
      } else {
        auto fv = free_variables(l.atom);
        vars.insert(fv.begin(), fv.end());
      }
    }
    Progressive prog{fresh_name("ongoing-" + a.name, taken), parameters_in(a, vars)};
    taken.insert(prog.name);
    out.predicates.push_back({prog.name, prog.params, {}});
    report.synthesized.push_back(prog.name);
    report.name_notes.emplace_back(prog.name, "progressive of " + a.name);

    // The protected facts become ordinary start conditions.
    std::vector<TimedCondition> conditions;
    for (const auto& c : a.conditions) {
      if (c.tag != TimeTag::OverAll) conditions.push_back(c);
    }
    for (const auto& l : literals) {
      Formula f = l.positive ? Formula::of_atom(l.atom) : Formula::negation(Formula::of_atom(l.atom));
      bool present = std::any_of(conditions.begin(), conditions.end(), [&](const TimedCondition& c) {
        if (c.tag != TimeTag::AtStart) return false;
        auto parts = top_conjuncts(c.formula);
        return std::find(parts.begin(), parts.end(), f) != parts.end();
      });
      if (!present) conditions.push_back({TimeTag::AtStart, f});
    }
    a.conditions = std::move(conditions);

    Atom marker = atom_over(prog.name, prog.params);
    a.effects.push_back({TimeTag::AtStart, Effect::add(marker)});
    a.effects.push_back({TimeTag::AtEnd, Effect::del(marker)});
    report.note_modified(a.name);
    progressives[a.name] = std::move(prog);
  }

  std::map<std::string, std::vector<std::string>> added;  // dedupe per interferer
  for (const auto& edge : edges) {
    const Progressive& prog = progressives.at(edge.protector);
    const ActionSchema& protector = *d.find_action(edge.protector);
    ActionSchema& interferer = *out.find_action(edge.interferer);

    // Same renaming as detect_interference.
    std::set<std::string> taken_vars;
    for (const auto& p : interferer.parameters) taken_vars.insert(p.name);
    for (const auto& p : protector.parameters) taken_vars.insert(p.name);
    std::map<std::string, std::string> rename_map;
    const ActionSchema& original_interferer = *d.find_action(edge.interferer);
    for (const auto& p : protector.parameters) {
      std::string name = p.name;
      if (original_interferer.find_parameter(p.name) != nullptr) {
        name = fresh_name(p.name, taken_vars);
        taken_vars.insert(name);
      }
      rename_map[p.name] = name;
    }

    std::vector<Term> args;
    std::vector<TypedVar> universal;
    for (const auto& p : prog.params) {
      std::string v = rename_map.at(p.name);
      auto it = edge.binding.find(v);
      Term rep = it != edge.binding.end() ? it->second : Term::var(v);
      bool rep_is_interferer_var =
          rep.is_variable() && original_interferer.find_parameter(rep.name) != nullptr &&
          std::none_of(rename_map.begin(), rename_map.end(),
                       [&](const auto& kv) { return kv.second == rep.name; });
      if (rep.is_variable() && !rep_is_interferer_var) {
        // Prefer an interferer variable from the same equivalence class.
        for (const auto& [var, value] : edge.binding) {
          if (value == rep && original_interferer.find_parameter(var) != nullptr) {
            rep = Term::var(var);
            rep_is_interferer_var = true;
            break;
          }
        }
      }
      if (rep.is_variable() && !rep_is_interferer_var) {
        bool listed = std::any_of(universal.begin(), universal.end(),
                                  [&](const TypedVar& u) { return u.name == rep.name; });
        if (!listed) universal.push_back({rep.name, p.type});
      }
      args.push_back(rep);
    }

    Formula guard = closed(universal, Formula::negation(Formula::of_atom(Atom{prog.name, args})));
    guard = normalize(std::move(guard));
    std::string text = print_formula(guard);
    auto& seen = added[interferer.name];
    if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
    seen.push_back(text);

    interferer.add_precondition(guard);
    report.note_modified(interferer.name);
    report.added_preconditions.emplace_back(interferer.name, text);
    if (edge.effect_time == TimeTag::AtEnd) {
      report.warnings.push_back("at-end effect " + print_effect(edge.effect) + " of " +
                                interferer.name + " can falsify " + edge.protector +
                                "'s over-all condition; it is only guarded at the start of " +
                                interferer.name);
    }
  }

  check_domain(out);
  return result;
}

// ---------------------------------------------------------------------------
// Definitions

LoweringResult synthesize_definitions(const Domain& d, const std::vector<DefinitionGroup>& groups) {
  LoweringResult result{d, {}};
  result.report.pass = pass_name(Pass::SynthDefs);
  Domain& out = result.domain;

  for (const auto& g : groups) {
    if (out.namespace_names().count(g.name) != 0) {
      throw ModelError("group name " + g.name + " is already declared", {}, g.name);
    }
    std::vector<Formula> disjuncts;
    std::vector<bool> member_is_definition;
    for (const auto& m : g.members) {
      const std::vector<TypedVar>* sig = nullptr;
      bool is_def = false;
      if (const PredicateDecl* p = out.find_predicate(m)) {
        sig = &p->parameters;
      } else if (const Definition* def = out.find_definition(m)) {
        sig = &def->parameters;
        is_def = true;
      } else {
        throw ModelError("group " + g.name + " member " + m + " is not a predicate", {}, m);
      }
      if (sig->size() != g.parameters.size()) {
        throw ModelError("signature mismatch in group " + g.name + ": " + m + " takes " +
                             std::to_string(sig->size()) + " arguments, the group " +
                             std::to_string(g.parameters.size()),
                         {}, m);
      }
      for (std::size_t i = 0; i < sig->size(); ++i) {
        const std::string& a = (*sig)[i].type;
        const std::string& b = g.parameters[i].type;
        if (!out.is_subtype(a, b) && !out.is_subtype(b, a)) {
          throw ModelError("signature mismatch in group " + g.name + ": argument " +
                               std::to_string(i + 1) + " of " + m + " is " + a + ", group has " + b,
                           {}, m);
        }
      }
      Atom atom = atom_over(m, g.parameters);
      disjuncts.push_back(is_def ? Formula::defined(atom) : Formula::of_atom(atom));
      member_is_definition.push_back(is_def);
    }
    Definition def{g.name, g.parameters, normalize(Formula::disjunction(disjuncts)), {}};
    out.definitions.push_back(def);
    result.report.synthesized.push_back(g.name);

    // Rewrite conjunctions that negate every member with the same arguments.
    auto rewrite = [&](std::vector<Formula> parts) -> std::pair<std::vector<Formula>, bool> {
      std::map<std::vector<Term>, std::set<std::size_t>> hits;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Formula& f = parts[i];
        if (f.kind != Formula::Kind::Not) continue;
        const Formula& inner = f.children.front();
        if (inner.kind != Formula::Kind::Atom && inner.kind != Formula::Kind::Defined) continue;
        for (std::size_t m = 0; m < g.members.size(); ++m) {
          bool kind_ok = member_is_definition[m] == (inner.kind == Formula::Kind::Defined);
          if (kind_ok && inner.atom.predicate == g.members[m]) hits[inner.atom.args].insert(i);
        }
      }
      bool changed = false;
      for (const auto& [args, indices] : hits) {
        std::set<std::string> covered;
        for (auto i : indices) covered.insert(parts[i].children.front().atom.predicate);
        if (covered.size() != std::set<std::string>(g.members.begin(), g.members.end()).size()) {
          continue;
        }
        std::vector<Formula> next;
        bool inserted = false;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (indices.count(i) != 0) {
            if (!inserted) {
              next.push_back(Formula::negation(Formula::defined(Atom{g.name, args})));
              inserted = true;
            }
            continue;
          }
          next.push_back(parts[i]);
        }
        parts = std::move(next);
        changed = true;
        break;  // indices are stale; callers loop until stable
      }
      return {parts, changed};
    };

    for (auto& a : out.actions) {
      std::vector<Formula> parts;
      std::vector<TimedCondition> others;
      for (const auto& c : a.conditions) {
        if (c.tag == TimeTag::AtStart) {
          for (auto& p : top_conjuncts(c.formula)) parts.push_back(p);
        } else {
          others.push_back(c);
        }
      }
      bool any = false;
      while (true) {
        auto [next, changed] = rewrite(parts);
        parts = std::move(next);
        if (!changed) break;
        any = true;
      }
      if (!any) continue;
      a.conditions.clear();
      if (a.is_durative()) {
        for (auto& p : parts) a.conditions.push_back({TimeTag::AtStart, p});
        for (auto& o : others) a.conditions.push_back(o);
      } else {
        a.conditions.push_back({TimeTag::AtStart, normalize(Formula::conjunction(parts))});
      }
      result.report.note_modified(a.name);
    }
  }
  check_domain(out);
  return result;
}

namespace {

class Expander {
 public:
  explicit Expander(const Domain& d) : domain_(d) {
    // Stratified: each body only refers to earlier definitions.
    for (const auto& def : d.definitions) expanded_[def.name] = {def.parameters, expand(def.body)};
  }

  Formula expand(const Formula& f) {
    Formula out = f;
    if (f.kind == Formula::Kind::Defined) {
      auto it = expanded_.find(f.atom.predicate);
      if (it == expanded_.end()) {
        throw ModelError("unknown definition " + f.atom.predicate, f.span, f.atom.predicate);
      }
      const auto& [params, body] = it->second;
      Binding b;
      for (std::size_t i = 0; i < params.size(); ++i) b[params[i].name] = f.atom.args.at(i);
      return rename(freshen(body), b);
    }
    for (auto& c : out.children) c = expand(c);
    return normalize(std::move(out));
  }

 private:
  // Renames quantified variables so that substituted arguments cannot be
  // captured.
  Formula freshen(const Formula& f) {
    Formula out = f;
    if (f.kind == Formula::Kind::Forall || f.kind == Formula::Kind::Exists) {
      Binding b;
      for (auto& v : out.vars) {
        std::string name = v.name + "-" + std::to_string(++counter_);
        b[v.name] = Term::var(name);
        v.name = name;
      }
      out.children.front() = rename(freshen(f.children.front()), b);
      return out;
    }
    for (auto& c : out.children) c = freshen(c);
    return out;
  }

  const Domain& domain_;
  std::map<std::string, std::pair<std::vector<TypedVar>, Formula>> expanded_;
  int counter_ = 0;
};

}  // namespace

Formula expand_definitions(const Domain& d, const Formula& f) { return Expander(d).expand(f); }

Domain expand_definitions(const Domain& d) {
  if (d.definitions.empty()) return d;
  Expander ex(d);
  Domain out = d;
  out.definitions.clear();
  for (auto& a : out.actions) {
    for (auto& c : a.conditions) c.formula = ex.expand(c.formula);
    for (auto& e : a.effects) {
      if (e.effect.kind == Effect::Kind::When) e.effect.condition = ex.expand(e.effect.condition);
    }
  }
  return out;
}

Problem expand_definitions(const Domain& d, const Problem& p) {
  if (d.definitions.empty()) return p;
  Problem out = p;
  out.goal = Expander(d).expand(p.goal);
  return out;
}

// ---------------------------------------------------------------------------
// (at end)

AtEndResult lower_at_end_conditions(const Domain& d, const Problem& p) {
  AtEndResult result{d, p, {}};
  LoweringReport& report = result.report;
  report.pass = pass_name(Pass::AtEnd);
  std::set<std::string> taken = d.namespace_names();

  for (auto& a : result.domain.actions) {
    if (!a.is_durative()) continue;
    bool has_end = std::any_of(a.conditions.begin(), a.conditions.end(),
                               [](const TimedCondition& c) { return c.tag == TimeTag::AtEnd; });
    if (!has_end) continue;

    Formula condition = a.condition_at(TimeTag::AtEnd);
    std::vector<TypedVar> params;
    for (const auto& v : variables_in_order(condition)) {
      if (const TypedVar* p = a.find_parameter(v)) params.push_back(*p);
    }
    std::string name = fresh_name("failed-" + a.name, taken);
    taken.insert(name);
    result.domain.predicates.push_back({name, params, {}});
    report.synthesized.push_back(name);
    report.name_notes.emplace_back(name, "failure marker of " + a.name);

    // Activity markers added at start and released at the end stay
    // unconditional, so a failed action does not block others forever.
    std::set<Atom> start_adds;
    for (const auto& e : a.effects) {
      if (e.tag == TimeTag::AtStart && e.effect.kind == Effect::Kind::Add) start_adds.insert(e.effect.atom);
    }
    std::set<std::string> condition_predicates;
    for_each_node(condition, [&](const Formula& f) {
      if (f.kind == Formula::Kind::Atom) condition_predicates.insert(f.atom.predicate);
    });
    for (auto& e : a.effects) {
      if (e.tag != TimeTag::AtEnd) continue;
      if (e.effect.kind == Effect::Kind::Delete && start_adds.count(e.effect.atom) != 0 &&
          condition_predicates.count(e.effect.atom.predicate) == 0) {
        continue;
      }
      e.effect = guard_effect(condition, e.effect);
    }
    Atom failure = atom_over(name, params);
    a.effects.push_back({TimeTag::AtEnd, Effect::when(negate(condition), {Effect::add(failure)})});
    a.conditions.erase(std::remove_if(a.conditions.begin(), a.conditions.end(),
                                      [](const TimedCondition& c) { return c.tag == TimeTag::AtEnd; }),
                       a.conditions.end());
    report.note_modified(a.name);

    Formula avoid = closed(params, Formula::negation(Formula::of_atom(failure)));
    result.problem.goal = conjoin(result.problem.goal, avoid);
    report.goal_augmentations.push_back(print_formula(normalize(avoid)));
  }
  check_domain(result.domain);
  return result;
}

// ---------------------------------------------------------------------------
// Duration ranges

namespace {

NumericExpr replace_duration(const NumericExpr& e, const NumericExpr& with, bool& used) {
  if (e.kind == NumericExpr::Kind::Variable && e.variable == kDurationVar) {
    used = true;
    return with;
  }
  NumericExpr out = e;
  for (auto& o : out.operands) o = replace_duration(o, with, used);
  return out;
}

Effect replace_duration(const Effect& e, const NumericExpr& with, bool& used) {
  Effect out = e;
  if (e.kind == Effect::Kind::Assign || e.kind == Effect::Kind::Increase) {
    out.value = replace_duration(e.value, with, used);
  }
  for (auto& t : out.then) t = replace_duration(t, with, used);
  return out;
}

bool is_literal_zero(const NumericExpr& e) {
  return e.kind == NumericExpr::Kind::Number && e.value == 0;
}

}  // namespace

LoweringResult lower_duration_range(const Domain& d, const std::vector<RateAnnotation>& rates) {
  LoweringResult result{d, {}};
  LoweringReport& report = result.report;
  report.pass = pass_name(Pass::DurationRange);
  Domain& out = result.domain;
  std::set<std::string> taken = d.namespace_names();

  for (const auto& ann : rates) {
    if (d.find_action(ann.action) == nullptr) {
      throw ModelError("rate annotation for unknown action " + ann.action, {}, ann.action);
    }
  }

  std::vector<ActionSchema> actions;
  for (const auto& a : d.actions) {
    if (!a.duration || a.duration->form != DurationSpec::Form::Range) {
      actions.push_back(a);
      continue;
    }
    auto ann_it = std::find_if(rates.begin(), rates.end(),
                               [&](const RateAnnotation& r) { return r.action == a.name; });
    if (ann_it == rates.end()) {
      throw ModelError("missing rate annotation for range action " + a.name, a.span, a.name);
    }
    const RateAnnotation& ann = *ann_it;
    for (const auto& r : ann.rates) {
      if (d.find_function(r.fluent.predicate) == nullptr) {
        throw ModelError("rate references unknown fluent " + r.fluent.predicate, {}, r.fluent.predicate);
      }
      for (const auto& v : free_variables(r.fluent)) {
        if (a.find_parameter(v) == nullptr) {
          throw ModelError("rate fluent variable " + v + " is not a parameter of " + a.name, {}, v);
        }
      }
    }

    auto claim = [&](const std::string& base) {
      std::string n = fresh_name(base, taken);
      taken.insert(n);
      report.synthesized.push_back(n);
      return n;
    };
    std::string ongoing_name = claim("ongoing-" + a.name);
    std::string window_name = claim("window-" + a.name);
    std::string start_name = claim(a.name + "-start");
    std::string stop_name = claim(a.name + "-stop");
    out.predicates.push_back({ongoing_name, a.parameters, {}});
    out.predicates.push_back({window_name, a.parameters, {}});
    report.name_notes.emplace_back(ongoing_name, "progressive of " + a.name);
    report.name_notes.emplace_back(window_name, "default-completion window of " + a.name);

    // One start-time fluent per annotated fluent (all record the same instant).
    struct Stamp {
      Atom fluent;
      std::string variable;
    };
    std::vector<Stamp> stamps;
    std::set<std::string> var_taken;
    for (const auto& p : a.parameters) var_taken.insert(p.name);
    auto add_stamp = [&](const std::string& base, std::vector<TypedVar> params, const std::string& var_base) {
      std::string name = claim(base);
      out.functions.push_back({name, params, {}});
      std::string var = fresh_name(var_base, var_taken);
      var_taken.insert(var);
      stamps.push_back({atom_over(name, params), var});
    };
    for (const auto& r : ann.rates) {
      add_stamp("started-" + a.name + "-" + r.fluent.predicate,
                parameters_in(a, free_variables(r.fluent)), "?start-" + r.fluent.predicate);
    }
    if (stamps.empty() && !is_literal_zero(a.duration->lo)) {
      add_stamp("started-" + a.name, a.parameters, "?start");
    }

    Atom ongoing = atom_over(ongoing_name, a.parameters);
    Atom window = atom_over(window_name, a.parameters);
    Formula is_ongoing = Formula::of_atom(ongoing);
    Formula end_condition = a.condition_at(TimeTag::AtEnd);
    bool has_end_condition = !end_condition.is_true();

    // A-start: runs for the maximum duration and posts the default completion.
    ActionSchema start = a;
    start.name = start_name;
    start.duration = DurationSpec::fixed(a.duration->hi);
    start.conditions.clear();
    bool end_placed = false;
    for (const auto& c : a.conditions) {
      if (c.tag != TimeTag::AtEnd) {
        start.conditions.push_back(c);
      } else if (!end_placed) {
        Formula stopped = Formula::negation(is_ongoing);
        start.conditions.push_back(
            {TimeTag::AtEnd, normalize(Formula::disjunction({stopped, end_condition}))});
        end_placed = true;
      }
    }
    start.conditions.push_back({TimeTag::AtStart, Formula::negation(Formula::of_atom(window))});
    start.effects.clear();
    for (const auto& e : a.effects) {
      if (e.tag == TimeTag::AtStart) start.effects.push_back(e);
    }
    start.effects.push_back({TimeTag::AtStart, Effect::add(ongoing)});
    start.effects.push_back({TimeTag::AtStart, Effect::add(window)});
    for (const auto& s : stamps) start.effects.push_back({TimeTag::AtStart, Effect::timestamp(s.fluent)});
    for (const auto& e : a.effects) {
      if (e.tag == TimeTag::AtEnd) start.effects.push_back({TimeTag::AtEnd, guard_effect(is_ongoing, e.effect)});
    }
    start.effects.push_back({TimeTag::AtEnd, Effect::when(is_ongoing, {Effect::del(ongoing)})});
    for (const auto& e : ann.overrun) {
      start.effects.push_back({TimeTag::AtEnd, guard_effect(is_ongoing, e)});
    }
    start.effects.push_back({TimeTag::AtEnd, Effect::del(window)});

    // A-stop: ends the activity early, interpolating the annotated fluents.
    ActionSchema stop;
    stop.name = stop_name;
    stop.kind = ActionSchema::Kind::Simple;
    stop.parameters = a.parameters;
    for (const auto& s : stamps) stop.parameters.push_back({s.variable, "time"});
    std::vector<Formula> pre{is_ongoing};
    std::optional<NumericExpr> elapsed;
    for (const auto& s : stamps) {
      pre.push_back(Formula::compare(CompareOp::Eq, NumericExpr::of_fluent(s.fluent),
                                     NumericExpr::of_variable(s.variable)));
    }
    if (!stamps.empty()) {
      elapsed = NumericExpr::binary(NumericExpr::Kind::Sub, NumericExpr::current_time(),
                                    NumericExpr::of_variable(stamps.front().variable));
      pre.push_back(Formula::compare(CompareOp::Ge, *elapsed, a.duration->lo));
      pre.push_back(Formula::compare(CompareOp::Le, *elapsed, a.duration->hi));
    }
    if (has_end_condition) pre.push_back(end_condition);
    stop.conditions.push_back({TimeTag::AtStart, normalize(Formula::conjunction(pre))});

    stop.effects.push_back({TimeTag::AtStart, Effect::del(ongoing)});
    std::set<Atom> annotated;
    for (const auto& r : ann.rates) annotated.insert(r.fluent);
    auto on_annotated = [&](const Effect& e) { return e.is_numeric() && annotated.count(e.atom) != 0; };
    for (const auto& te : a.effects) {
      if (te.tag != TimeTag::AtEnd) continue;
      Effect e = te.effect;
      if (on_annotated(e)) continue;
      if (e.kind == Effect::Kind::When) {
        e.then.erase(std::remove_if(e.then.begin(), e.then.end(), on_annotated), e.then.end());
        if (e.then.empty()) continue;
      }
      bool used = false;
      NumericExpr with = elapsed ? *elapsed : NumericExpr::number(0);
      e = replace_duration(e, with, used);
      if (used && !elapsed) {
        throw ModelError("at-end effect of " + a.name +
                             " uses ?duration but no start time is recorded; annotate a rate",
                         e.span, a.name);
      }
      stop.effects.push_back({TimeTag::AtStart, e});
    }
    for (std::size_t i = 0; i < ann.rates.size(); ++i) {
      NumericExpr since = NumericExpr::binary(NumericExpr::Kind::Sub, NumericExpr::current_time(),
                                              NumericExpr::of_variable(stamps[i].variable));
      stop.effects.push_back({TimeTag::AtStart,
                              Effect::increase(ann.rates[i].fluent,
                                               NumericExpr::binary(NumericExpr::Kind::Mul, since,
                                                                   ann.rates[i].rate))});
    }

    report.modified_actions.push_back(a.name);
    report.range_mappings.push_back({a.name, start_name, stop_name, stamps.size()});
    actions.push_back(std::move(start));
    actions.push_back(std::move(stop));
  }
  out.actions = std::move(actions);
  check_domain(out);
  return result;
}

// ---------------------------------------------------------------------------
// Pipeline

const char* pass_name(Pass p) {
  switch (p) {
    case Pass::DurationRange: return "duration-range";
    case Pass::OverAll: return "over-all";
    case Pass::AtEnd: return "at-end";
    case Pass::SynthDefs: return "synth-defs";
    case Pass::ExpandDefs: return "expand-defs";
  }
  return "?";
}

std::optional<Pass> parse_pass_name(const std::string& name) {
  for (Pass p : default_pipeline()) {
    if (name == pass_name(p)) return p;
  }
  return std::nullopt;
}

std::vector<Pass> default_pipeline() {
  return {Pass::DurationRange, Pass::OverAll, Pass::AtEnd, Pass::SynthDefs, Pass::ExpandDefs};
}

PipelineResult run_pipeline(const Domain& d, const Problem& p, const PipelineInput& input) {
  PipelineResult result{d, p, {}};
  auto selected = [&](Pass pass) {
    return std::find(input.passes.begin(), input.passes.end(), pass) != input.passes.end();
  };
  for (Pass pass : default_pipeline()) {
    if (!selected(pass)) continue;
    switch (pass) {
      case Pass::DurationRange: {
        auto r = lower_duration_range(result.domain, input.rates);
        result.domain = std::move(r.domain);
        result.reports.push_back(std::move(r.report));
        break;
      }
      case Pass::OverAll: {
        auto r = lower_over_all(result.domain, input.over_all);
        result.domain = std::move(r.domain);
        result.reports.push_back(std::move(r.report));
        break;
      }
      case Pass::AtEnd: {
        auto r = lower_at_end_conditions(result.domain, result.problem);
        result.domain = std::move(r.domain);
        result.problem = std::move(r.problem);
        result.reports.push_back(std::move(r.report));
        break;
      }
      case Pass::SynthDefs: {
        auto r = synthesize_definitions(result.domain, input.groups);
        result.domain = std::move(r.domain);
        result.reports.push_back(std::move(r.report));
        break;
      }
      case Pass::ExpandDefs: {
        LoweringReport report;
        report.pass = pass_name(Pass::ExpandDefs);
        for (const auto& def : result.domain.definitions) report.warnings.push_back("expanded " + def.name);
        result.problem = expand_definitions(result.domain, result.problem);
        result.domain = expand_definitions(result.domain);
        result.reports.push_back(std::move(report));
        break;
      }
    }
  }
  return result;
}

TemporalFeatures count_temporal_features(const Domain& d) {
  TemporalFeatures t;
  for (const auto& a : d.actions) {
    for (const auto& c : a.conditions) {
      if (c.tag == TimeTag::OverAll) ++t.over_all;
      if (c.tag == TimeTag::AtEnd) ++t.at_end_conditions;
    }
    if (a.duration && a.duration->form == DurationSpec::Form::Range) ++t.range_durations;
  }
  return t;
}

}  // namespace tempolower
