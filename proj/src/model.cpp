#include "tempolower/model.hpp"

#include <algorithm>
#include <functional>

namespace tempolower {

std::string SourceSpan::str() const {
  std::string out = file.empty() ? "<input>" : file;
  out += ":" + std::to_string(line) + ":" + std::to_string(column);
  return out;
}

ModelError::ModelError(std::string message, SourceSpan span, std::string token)
    : std::runtime_error(span.line > 0 ? span.str() + ": " + message : message),
      message_(std::move(message)),
      span_(std::move(span)),
      token_(std::move(token)) {}

bool is_numeric_type(const std::string& type) {
  return type == "time" || type == "number";
}

// ---------------------------------------------------------------------------
// Terms and atoms

Term Term::var(std::string name) { return Term{Kind::Variable, std::move(name), {}}; }
Term Term::obj(std::string name) { return Term{Kind::Object, std::move(name), {}}; }
Term Term::num(Rational value) { return Term{Kind::Number, {}, std::move(value)}; }

std::string Term::str() const {
  return kind == Kind::Number ? format_rational(number) : name;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  return a.kind == Term::Kind::Number ? a.number == b.number : a.name == b.name;
}

bool operator<(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.kind == Term::Kind::Number) return a.number < b.number;
  return a.name < b.name;
}

std::string Atom::str() const {
  std::string out = "(" + predicate;
  for (const auto& t : args) out += " " + t.str();
  return out + ")";
}

bool operator<(const Atom& a, const Atom& b) {
  if (a.predicate != b.predicate) return a.predicate < b.predicate;
  return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(),
                                      b.args.end());
}

// ---------------------------------------------------------------------------
// Numeric expressions

NumericExpr NumericExpr::number(Rational v) {
  NumericExpr e;
  e.kind = Kind::Number;
  e.value = std::move(v);
  return e;
}

NumericExpr NumericExpr::of_fluent(Atom f) {
  NumericExpr e;
  e.kind = Kind::Fluent;
  e.fluent = std::move(f);
  return e;
}

NumericExpr NumericExpr::of_variable(std::string name) {
  NumericExpr e;
  e.kind = Kind::Variable;
  e.variable = std::move(name);
  return e;
}

NumericExpr NumericExpr::current_time() {
  NumericExpr e;
  e.kind = Kind::CurrentTime;
  return e;
}

NumericExpr NumericExpr::binary(Kind op, NumericExpr lhs, NumericExpr rhs) {
  NumericExpr e;
  e.kind = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

// ---------------------------------------------------------------------------
// Formulas

const char* compare_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

CompareOp negate_compare(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Ge: return CompareOp::Lt;
    case CompareOp::Eq: break;
  }
  return CompareOp::Eq;
}

Formula Formula::falsity() {
  Formula f;
  f.kind = Kind::Or;
  return f;
}

Formula Formula::of_atom(Atom a) {
  Formula f;
  f.kind = Kind::Atom;
  f.atom = std::move(a);
  return f;
}

Formula Formula::defined(Atom a) {
  Formula f;
  f.kind = Kind::Defined;
  f.atom = std::move(a);
  return f;
}

Formula Formula::negation(Formula inner) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::conjunction(std::vector<Formula> parts) {
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(parts);
  return f;
}

Formula Formula::disjunction(std::vector<Formula> parts) {
  Formula f;
  f.kind = Kind::Or;
  f.children = std::move(parts);
  return f;
}

Formula Formula::compare(CompareOp op, NumericExpr lhs, NumericExpr rhs) {
  Formula f;
  f.kind = Kind::Compare;
  f.op = op;
  f.operands.push_back(std::move(lhs));
  f.operands.push_back(std::move(rhs));
  return f;
}

Formula Formula::forall(std::vector<TypedVar> vars, Formula body) {
  Formula f;
  f.kind = Kind::Forall;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::exists(std::vector<TypedVar> vars, Formula body) {
  Formula f;
  f.kind = Kind::Exists;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  return f;
}

bool Formula::is_literal() const {
  if (kind == Kind::Atom) return true;
  return kind == Kind::Not && children.size() == 1 && children[0].kind == Kind::Atom;
}

namespace {

Formula normalize_impl(Formula f, bool negated);

Formula junction(Formula::Kind kind, std::vector<Formula> children, const SourceSpan& span) {
  std::vector<Formula> flat;
  for (auto& c : children) {
    if (c.kind == kind) {
      for (auto& g : c.children) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.size() == 1) return std::move(flat.front());
  Formula out;
  out.kind = kind;
  out.children = std::move(flat);
  out.span = span;
  return out;
}

Formula normalize_impl(Formula f, bool negated) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom:
    case K::Defined:
    case K::Compare: {
      if (!negated) return f;
      SourceSpan span = f.span;
      Formula n = Formula::negation(std::move(f));
      n.span = span;
      return n;
    }
    case K::Not:
      return normalize_impl(std::move(f.children.front()), !negated);
    case K::And:
    case K::Or: {
      K kind = f.kind;
      if (negated) kind = kind == K::And ? K::Or : K::And;
      std::vector<Formula> children;
      children.reserve(f.children.size());
      for (auto& c : f.children) children.push_back(normalize_impl(std::move(c), negated));
      return junction(kind, std::move(children), f.span);
    }
    case K::Forall:
    case K::Exists: {
      K kind = f.kind;
      if (negated) kind = kind == K::Forall ? K::Exists : K::Forall;
      Formula body = normalize_impl(std::move(f.children.front()), negated);
      if (f.vars.empty()) return body;
      Formula out;
      out.kind = kind;
      out.vars = std::move(f.vars);
      out.children.push_back(std::move(body));
      out.span = f.span;
      return out;
    }
  }
  return f;
}

}  // namespace

Formula normalize(Formula f) { return normalize_impl(std::move(f), false); }

Formula negate(const Formula& f) { return normalize_impl(f, true); }

Formula conjoin(const Formula& a, const Formula& b) {
  return normalize(Formula::conjunction({a, b}));
}

// ---------------------------------------------------------------------------
// Effects

Effect Effect::add(Atom a) {
  Effect e;
  e.kind = Kind::Add;
  e.atom = std::move(a);
  return e;
}

Effect Effect::del(Atom a) {
  Effect e;
  e.kind = Kind::Delete;
  e.atom = std::move(a);
  return e;
}

Effect Effect::assign(Atom fluent, NumericExpr v) {
  Effect e;
  e.kind = Kind::Assign;
  e.atom = std::move(fluent);
  e.value = std::move(v);
  return e;
}

Effect Effect::increase(Atom fluent, NumericExpr v) {
  Effect e;
  e.kind = Kind::Increase;
  e.atom = std::move(fluent);
  e.value = std::move(v);
  return e;
}

Effect Effect::timestamp(Atom fluent) {
  Effect e;
  e.kind = Kind::Timestamp;
  e.atom = std::move(fluent);
  return e;
}

Effect Effect::when(Formula condition, std::vector<Effect> then) {
  Effect e;
  e.kind = Kind::When;
  e.condition = normalize(std::move(condition));
  e.then = std::move(then);
  return e;
}

Effect guard_effect(const Formula& guard, const Effect& e) {
  if (e.kind == Effect::Kind::When) {
    Effect out = e;
    out.condition = conjoin(guard, e.condition);
    return out;
  }
  Effect out = Effect::when(guard, {e});
  out.span = e.span;
  return out;
}

const char* time_tag_name(TimeTag tag) {
  switch (tag) {
    case TimeTag::AtStart: return "at start";
    case TimeTag::AtEnd: return "at end";
    case TimeTag::OverAll: return "over all";
  }
  return "at start";
}

DurationSpec DurationSpec::fixed(NumericExpr v) {
  DurationSpec d;
  d.form = Form::Fixed;
  d.value = std::move(v);
  return d;
}

DurationSpec DurationSpec::range(NumericExpr lo, NumericExpr hi) {
  DurationSpec d;
  d.form = Form::Range;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

// ---------------------------------------------------------------------------
// Schemas, domains, problems

Formula ActionSchema::condition_at(TimeTag tag) const {
  std::vector<Formula> parts;
  for (const auto& c : conditions) {
    if (c.tag == tag) parts.push_back(c.formula);
  }
  return normalize(Formula::conjunction(std::move(parts)));
}

Formula ActionSchema::start_condition() const { return condition_at(TimeTag::AtStart); }

void ActionSchema::add_precondition(const Formula& f) {
  if (kind == Kind::Simple) {
    if (conditions.empty()) {
      conditions.push_back({TimeTag::AtStart, normalize(f)});
    } else {
      conditions.front().formula = conjoin(conditions.front().formula, f);
    }
    return;
  }
  conditions.push_back({TimeTag::AtStart, normalize(f)});
}

const TypedVar* ActionSchema::find_parameter(const std::string& n) const {
  for (const auto& p : parameters) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

namespace {

template <typename T>
const T* find_named(const std::vector<T>& items, const std::string& n) {
  for (const auto& item : items) {
    if (item.name == n) return &item;
  }
  return nullptr;
}

}  // namespace

const ActionSchema* Domain::find_action(const std::string& n) const { return find_named(actions, n); }
ActionSchema* Domain::find_action(const std::string& n) {
  return const_cast<ActionSchema*>(std::as_const(*this).find_action(n));
}
const PredicateDecl* Domain::find_predicate(const std::string& n) const {
  return find_named(predicates, n);
}
const PredicateDecl* Domain::find_function(const std::string& n) const {
  return find_named(functions, n);
}
const Definition* Domain::find_definition(const std::string& n) const {
  return find_named(definitions, n);
}

bool Domain::has_type(const std::string& t) const {
  return t == kObjectType || is_numeric_type(t) || find_named(types, t) != nullptr;
}

bool Domain::is_subtype(const std::string& sub, const std::string& super) const {
  if (super == kObjectType && !is_numeric_type(sub)) return true;
  std::string current = sub;
  for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
    if (current == super) return true;
    const TypeDecl* decl = find_named(types, current);
    if (decl == nullptr) return false;
    current = decl->parent;
  }
  return false;
}

std::set<std::string> Domain::namespace_names() const {
  std::set<std::string> out;
  for (const auto& t : types) out.insert(t.name);
  for (const auto& p : predicates) out.insert(p.name);
  for (const auto& f : functions) out.insert(f.name);
  for (const auto& d : definitions) out.insert(d.name);
  for (const auto& a : actions) out.insert(a.name);
  return out;
}

const TypedVar* Problem::find_object(const std::string& n) const {
  return find_named(objects, n);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

struct Substituter {
  const Binding& binding;
  bool strict;

  Term term(const Term& t, const std::set<std::string>& shadowed) const {
    if (!t.is_variable() || shadowed.count(t.name) != 0) return t;
    auto it = binding.find(t.name);
    if (it == binding.end()) {
      if (strict) throw ModelError("unbound variable " + t.name, {}, t.name);
      return t;
    }
    return it->second;
  }

  Atom atom(const Atom& a, const std::set<std::string>& shadowed) const {
    Atom out{a.predicate, {}};
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) out.args.push_back(term(t, shadowed));
    return out;
  }

  NumericExpr expr(const NumericExpr& e, const std::set<std::string>& shadowed) const {
    NumericExpr out = e;
    switch (e.kind) {
      case NumericExpr::Kind::Fluent:
        out.fluent = atom(e.fluent, shadowed);
        break;
      case NumericExpr::Kind::Variable: {
        Term t = term(Term::var(e.variable), shadowed);
        if (t.kind == Term::Kind::Number) {
          out = NumericExpr::number(t.number);
          out.span = e.span;
        } else if (t.kind == Term::Kind::Variable) {
          out.variable = t.name;
        } else {
          throw ModelError("object " + t.name + " used as a number", e.span, t.name);
        }
        break;
      }
      default:
        for (auto& o : out.operands) o = expr(o, shadowed);
        break;
    }
    return out;
  }

  Formula formula(const Formula& f, const std::set<std::string>& shadowed) const {
    Formula out = f;
    switch (f.kind) {
      case Formula::Kind::Atom:
      case Formula::Kind::Defined:
        out.atom = atom(f.atom, shadowed);
        break;
      case Formula::Kind::Compare:
        for (auto& o : out.operands) o = expr(o, shadowed);
        break;
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        std::set<std::string> inner = shadowed;
        for (const auto& v : f.vars) inner.insert(v.name);
        out.children.front() = formula(f.children.front(), inner);
        break;
      }
      default:
        for (auto& c : out.children) c = formula(c, shadowed);
        break;
    }
    return out;
  }

  Effect effect(const Effect& e) const {
    static const std::set<std::string> none;
    Effect out = e;
    out.atom = atom(e.atom, none);
    if (e.kind == Effect::Kind::Assign || e.kind == Effect::Kind::Increase) {
      out.value = expr(e.value, none);
    }
    if (e.kind == Effect::Kind::When) {
      out.condition = formula(e.condition, none);
      for (auto& t : out.then) t = effect(t);
    }
    return out;
  }
};

const std::set<std::string>& no_shadow() {
  static const std::set<std::string> none;
  return none;
}

}  // namespace

Formula substitute(const Formula& f, const Binding& b) {
  return Substituter{b, true}.formula(f, no_shadow());
}
Effect substitute(const Effect& e, const Binding& b) { return Substituter{b, true}.effect(e); }
NumericExpr substitute(const NumericExpr& e, const Binding& b) {
  return Substituter{b, true}.expr(e, no_shadow());
}
Atom substitute(const Atom& a, const Binding& b) {
  return Substituter{b, true}.atom(a, no_shadow());
}

Formula rename(const Formula& f, const Binding& b) {
  return Substituter{b, false}.formula(f, no_shadow());
}
Effect rename(const Effect& e, const Binding& b) { return Substituter{b, false}.effect(e); }
NumericExpr rename(const NumericExpr& e, const Binding& b) {
  return Substituter{b, false}.expr(e, no_shadow());
}
Atom rename(const Atom& a, const Binding& b) {
  return Substituter{b, false}.atom(a, no_shadow());
}

// ---------------------------------------------------------------------------
// Free variables

namespace {

void collect(const Atom& a, const std::set<std::string>& bound, std::set<std::string>& out) {
  for (const auto& t : a.args) {
    if (t.is_variable() && bound.count(t.name) == 0) out.insert(t.name);
  }
}

void collect(const NumericExpr& e, const std::set<std::string>& bound,
             std::set<std::string>& out) {
  if (e.kind == NumericExpr::Kind::Fluent) collect(e.fluent, bound, out);
  if (e.kind == NumericExpr::Kind::Variable && bound.count(e.variable) == 0) {
    out.insert(e.variable);
  }
  for (const auto& o : e.operands) collect(o, bound, out);
}

void collect(const Formula& f, const std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Defined:
      collect(f.atom, bound, out);
      break;
    case Formula::Kind::Compare:
      for (const auto& o : f.operands) collect(o, bound, out);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      std::set<std::string> inner = bound;
      for (const auto& v : f.vars) inner.insert(v.name);
      collect(f.children.front(), inner, out);
      break;
    }
    default:
      for (const auto& c : f.children) collect(c, bound, out);
      break;
  }
}

void collect(const Effect& e, std::set<std::string>& out) {
  collect(e.atom, no_shadow(), out);
  if (e.kind == Effect::Kind::Assign || e.kind == Effect::Kind::Increase) {
    collect(e.value, no_shadow(), out);
  }
  if (e.kind == Effect::Kind::When) {
    collect(e.condition, no_shadow(), out);
    for (const auto& t : e.then) collect(t, out);
  }
}

}  // namespace

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> out;
  collect(f, no_shadow(), out);
  return out;
}

std::set<std::string> free_variables(const Effect& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

std::set<std::string> free_variables(const NumericExpr& e) {
  std::set<std::string> out;
  collect(e, no_shadow(), out);
  return out;
}

std::set<std::string> free_variables(const Atom& a) {
  std::set<std::string> out;
  collect(a, no_shadow(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Unification

std::optional<Binding> unify(const Atom& a, const Atom& b) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;

  Binding theta;
  auto walk = [&theta](Term t) {
    while (t.is_variable()) {
      auto it = theta.find(t.name);
      if (it == theta.end()) break;
      t = it->second;
    }
    return t;
  };

  for (std::size_t i = 0; i < a.args.size(); ++i) {
    Term x = walk(a.args[i]);
    Term y = walk(b.args[i]);
    if (x == y) continue;
    if (y.is_variable()) {
      theta[y.name] = x;
    } else if (x.is_variable()) {
      theta[x.name] = y;
    } else {
      return std::nullopt;
    }
  }

  Binding resolved;
  for (const auto& [name, value] : theta) resolved[name] = walk(value);
  return resolved;
}

// ---------------------------------------------------------------------------
// Invariant checks

void check_definitions_stratified(const Domain& d) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < d.definitions.size(); ++i) position[d.definitions[i].name] = i;

  for (std::size_t i = 0; i < d.definitions.size(); ++i) {
    const Definition& def = d.definitions[i];
    for_each_node(def.body, [&](const Formula& node) {
      if (node.kind != Formula::Kind::Defined) return;
      auto it = position.find(node.atom.predicate);
      if (it == position.end()) {
        throw ModelError("unknown definition " + node.atom.predicate, node.span,
                         node.atom.predicate);
      }
      if (it->second >= i) {
        throw ModelError("definition " + def.name + " is recursive or refers to later definition " +
                             node.atom.predicate,
                         def.span, def.name);
      }
    });
  }
}

namespace {

void check_unique(const std::vector<std::string>& names, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ModelError("duplicate " + what + " " + n, {}, n);
  }
}

template <typename T>
std::vector<std::string> names_of(const std::vector<T>& items) {
  std::vector<std::string> out;
  for (const auto& i : items) out.push_back(i.name);
  return out;
}

void check_variables_bound(const std::set<std::string>& used, const ActionSchema& a,
                           bool allow_duration) {
  for (const auto& v : used) {
    if (a.find_parameter(v) != nullptr) continue;
    if (allow_duration && v == kDurationVar) continue;
    throw ModelError("variable " + v + " in action " + a.name + " is not a parameter", a.span, v);
  }
}

void check_no_contradictory_effects(const ActionSchema& a) {
  for (TimeTag tag : {TimeTag::AtStart, TimeTag::AtEnd}) {
    std::set<Atom> adds;
    std::set<Atom> dels;
    for (const auto& te : a.effects) {
      if (te.tag != tag) continue;
      if (te.effect.kind == Effect::Kind::Add) adds.insert(te.effect.atom);
      if (te.effect.kind == Effect::Kind::Delete) dels.insert(te.effect.atom);
    }
    for (const auto& atom : adds) {
      if (dels.count(atom) != 0) {
        throw ModelError("action " + a.name + " both adds and deletes " + atom.str() + " " +
                             time_tag_name(tag),
                         a.span, a.name);
      }
    }
  }
}

}  // namespace

void check_domain(const Domain& d) {
  check_unique(names_of(d.types), "type");
  std::vector<std::string> predicate_like = names_of(d.predicates);
  for (const auto& def : d.definitions) predicate_like.push_back(def.name);
  check_unique(predicate_like, "predicate");
  check_unique(names_of(d.functions), "function");
  check_unique(names_of(d.actions), "action");

  check_definitions_stratified(d);
  for (const auto& def : d.definitions) {
    for (const auto& v : free_variables(def.body)) {
      bool is_param = std::any_of(def.parameters.begin(), def.parameters.end(),
                                  [&](const TypedVar& p) { return p.name == v; });
      if (!is_param) {
        throw ModelError("variable " + v + " in definition " + def.name + " is not a parameter",
                         def.span, v);
      }
    }
  }

  for (const auto& a : d.actions) {
    if (a.kind == ActionSchema::Kind::Simple) {
      if (a.duration) throw ModelError("simple action " + a.name + " has a duration", a.span, a.name);
      for (const auto& c : a.conditions) {
        if (c.tag != TimeTag::AtStart) {
          throw ModelError("simple action " + a.name + " has a non-start condition", a.span, a.name);
        }
      }
      for (const auto& e : a.effects) {
        if (e.tag != TimeTag::AtStart) {
          throw ModelError("simple action " + a.name + " has an at-end effect", a.span, a.name);
        }
      }
    } else if (!a.duration) {
      throw ModelError("durative action " + a.name + " has no duration", a.span, a.name);
    }

    for (const auto& c : a.conditions) check_variables_bound(free_variables(c.formula), a, false);
    for (const auto& e : a.effects) {
      check_variables_bound(free_variables(e.effect), a, e.tag == TimeTag::AtEnd);
      if (e.tag != TimeTag::AtStart) {
        bool has_timestamp = e.effect.kind == Effect::Kind::Timestamp;
        for (const auto& t : e.effect.then) has_timestamp |= t.kind == Effect::Kind::Timestamp;
        if (has_timestamp) {
          throw ModelError("timestamp record in at-end effect of " + a.name, e.effect.span,
                           a.name);
        }
      }
    }
    if (a.duration) {
      const DurationSpec& ds = *a.duration;
      std::set<std::string> used;
      if (ds.form == DurationSpec::Form::Fixed) {
        used = free_variables(ds.value);
      } else {
        used = free_variables(ds.lo);
        auto more = free_variables(ds.hi);
        used.insert(more.begin(), more.end());
      }
      check_variables_bound(used, a, false);
    }
    check_no_contradictory_effects(a);
  }
}

}  // namespace tempolower

namespace tempolower {

std::string PlanStep::label() const {
  std::string out = "(" + action;
  for (const auto& a : args) out += " " + a.str();
  return out + ")";
}

}  // namespace tempolower
