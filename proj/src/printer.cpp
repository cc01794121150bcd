#include "tempolower/printer.hpp"

#include <sstream>

namespace tempolower {

namespace {

std::string typed_list(const std::vector<TypedVar>& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!out.empty()) out += " ";
    out += vars[i].name;
    bool last_of_run = i + 1 == vars.size() || vars[i + 1].type != vars[i].type;
    if (last_of_run) out += " - " + vars[i].type;
  }
  return out;
}

std::string signature(const PredicateDecl& p) {
  std::string params = typed_list(p.parameters);
  return "(" + p.name + (params.empty() ? "" : " " + params) + ")";
}

std::string atom_text(const Atom& a) { return a.str(); }

void print_action(std::ostream& os, const ActionSchema& a) {
  os << "  (" << (a.is_durative() ? ":durative-action " : ":action ") << a.name << "\n";
  os << "    :parameters (" << typed_list(a.parameters) << ")";
  if (a.duration) {
    os << "\n    :duration ";
    if (a.duration->form == DurationSpec::Form::Fixed) {
      os << "(= ?duration " << print_expr(a.duration->value) << ")";
    } else {
      os << "(and (>= ?duration " << print_expr(a.duration->lo) << ") (<= ?duration "
         << print_expr(a.duration->hi) << "))";
    }
  }
  if (!a.conditions.empty()) {
    if (a.is_durative()) {
      os << "\n    :condition (and";
      for (const auto& c : a.conditions) {
        os << "\n      (" << time_tag_name(c.tag) << " " << print_formula(c.formula) << ")";
      }
      os << ")";
    } else {
      Formula pre = a.conditions.size() == 1 ? a.conditions.front().formula : a.start_condition();
      os << "\n    :precondition " << print_formula(pre);
    }
  }
  if (!a.effects.empty()) {
    os << "\n    :effect (and";
    for (const auto& e : a.effects) {
      if (a.is_durative()) {
        os << "\n      (" << time_tag_name(e.tag) << " " << print_effect(e.effect) << ")";
      } else {
        os << "\n      " << print_effect(e.effect);
      }
    }
    os << ")";
  }
  os << ")";
}

}  // namespace

std::string print_expr(const NumericExpr& e) {
  using K = NumericExpr::Kind;
  switch (e.kind) {
    case K::Number: return format_rational(e.value);
    case K::Fluent: return atom_text(e.fluent);
    case K::Variable: return e.variable;
    case K::CurrentTime: return "(current-time)";
    case K::Negate: return "(- " + print_expr(e.operands.front()) + ")";
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      const char* op = e.kind == K::Add ? "+" : e.kind == K::Sub ? "-" : e.kind == K::Mul ? "*" : "/";
      return std::string("(") + op + " " + print_expr(e.operands[0]) + " " +
             print_expr(e.operands[1]) + ")";
    }
  }
  return "0";
}

std::string print_formula(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom:
    case K::Defined:
      return atom_text(f.atom);
    case K::Not:
      return "(not " + print_formula(f.children.front()) + ")";
    case K::And:
    case K::Or: {
      std::string out = f.kind == K::And ? "(and" : "(or";
      for (const auto& c : f.children) out += " " + print_formula(c);
      return out + ")";
    }
    case K::Compare:
      return std::string("(") + compare_symbol(f.op) + " " + print_expr(f.operands[0]) + " " +
             print_expr(f.operands[1]) + ")";
    case K::Forall:
    case K::Exists:
      return std::string(f.kind == K::Forall ? "(forall (" : "(exists (") + typed_list(f.vars) +
             ") " + print_formula(f.children.front()) + ")";
  }
  return "(and)";
}

std::string print_effect(const Effect& e) {
  using K = Effect::Kind;
  switch (e.kind) {
    case K::Add: return atom_text(e.atom);
    case K::Delete: return "(not " + atom_text(e.atom) + ")";
    case K::Assign: return "(assign " + atom_text(e.atom) + " " + print_expr(e.value) + ")";
    case K::Increase: return "(increase " + atom_text(e.atom) + " " + print_expr(e.value) + ")";
    case K::Timestamp: {
      std::string inner = atom_text(e.atom);
      inner.pop_back();
      return inner + " (current-time))";
    }
    case K::When: {
      std::string body;
      if (e.then.size() == 1) {
        body = print_effect(e.then.front());
      } else {
        body = "(and";
        for (const auto& t : e.then) body += " " + print_effect(t);
        body += ")";
      }
      return "(when " + print_formula(e.condition) + " " + body + ")";
    }
  }
  return "(and)";
}

std::string print_domain(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")";
  if (!d.types.empty()) {
    os << "\n  (:types";
    for (std::size_t i = 0; i < d.types.size(); ++i) {
      os << " " << d.types[i].name;
      if (i + 1 == d.types.size() || d.types[i + 1].parent != d.types[i].parent) {
        os << " - " << d.types[i].parent;
      }
    }
    os << ")";
  }
  if (!d.predicates.empty()) {
    os << "\n  (:predicates";
    for (const auto& p : d.predicates) os << "\n    " << signature(p);
    os << ")";
  }
  if (!d.functions.empty()) {
    os << "\n  (:functions";
    for (const auto& f : d.functions) os << "\n    " << signature(f);
    os << ")";
  }
  for (const auto& def : d.definitions) {
    PredicateDecl head{def.name, def.parameters, {}};
    os << "\n  (:derived " << signature(head) << "\n    " << print_formula(def.body) << ")";
  }
  for (const auto& a : d.actions) {
    os << "\n";
    print_action(os, a);
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "  (:domain " << p.domain_name << ")";
  if (!p.objects.empty()) os << "\n  (:objects " << typed_list(p.objects) << ")";
  if (!p.init_atoms.empty() || !p.init_fluents.empty()) {
    os << "\n  (:init";
    for (const auto& a : p.init_atoms) os << "\n    " << atom_text(a);
    for (const auto& [f, v] : p.init_fluents) {
      os << "\n    (= " << atom_text(f) << " " << format_rational(v) << ")";
    }
    os << ")";
  }
  os << "\n  (:goal " << print_formula(p.goal) << "))\n";
  return os.str();
}

std::string print_plan(const Plan& plan) {
  std::ostringstream os;
  for (const auto& step : plan) {
    os << format_rational(step.time) << ": " << step.label();
    if (step.duration) os << " [" << format_rational(*step.duration) << "]";
    os << "\n";
  }
  return os.str();
}

std::string print_rates(const std::vector<RateAnnotation>& rates) {
  std::ostringstream os;
  os << "(:rates";
  for (const auto& r : rates) {
    os << "\n  (" << r.action;
    for (const auto& rate : r.rates) {
      os << " (" << atom_text(rate.fluent) << " " << print_expr(rate.rate) << ")";
    }
    if (!r.overrun.empty()) {
      os << " (:overrun (and";
      for (const auto& e : r.overrun) os << " " << print_effect(e);
      os << "))";
    }
    os << ")";
  }
  os << ")\n";
  return os.str();
}

}  // namespace tempolower
