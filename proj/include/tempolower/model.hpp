#pragma once

// Abstract syntax shared by the parser, the lowering passes and the
// simulator. Every node is a plain value; trees own their children.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempolower/rational.hpp"

namespace tempolower {

/// Location of a node or token in its source text.
///
/// Spans never take part in structural equality: two trees that differ only in
/// where they were read from compare equal.
struct SourceSpan {
  std::string file;
  int line = 0;
  int column = 0;

  std::string str() const;
  friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

/// Any violation of the model invariants: parse errors, arity/type mismatch,
/// unbound variables, unsupported constructs.
class ModelError : public std::runtime_error {
 public:
  ModelError(std::string message, SourceSpan span = {}, std::string token = {});

  const SourceSpan& span() const { return span_; }
  const std::string& token() const { return token_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  SourceSpan span_;
  std::string token_;
};

inline constexpr const char* kObjectType = "object";
inline constexpr const char* kDurationVar = "?duration";

/// Builtin numeric parameter types. Parameters of these types range over
/// rationals and are bound from linking equalities rather than objects.
bool is_numeric_type(const std::string& type);

struct Term {
  enum class Kind { Variable, Object, Number };

  Kind kind = Kind::Object;
  std::string name;
  Rational number;

  static Term var(std::string name);
  static Term obj(std::string name);
  static Term num(Rational value);

  bool is_variable() const { return kind == Kind::Variable; }
  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b);
};

/// Predicate (or numeric fluent) applied to terms.
struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::string str() const;

  friend bool operator==(const Atom& a, const Atom& b) = default;
  friend bool operator<(const Atom& a, const Atom& b);
};

struct TypedVar {
  std::string name;
  std::string type = kObjectType;

  friend bool operator==(const TypedVar&, const TypedVar&) = default;
};

struct NumericExpr {
  enum class Kind { Number, Fluent, Variable, CurrentTime, Add, Sub, Mul, Div, Negate };

  Kind kind = Kind::Number;
  Rational value;
  Atom fluent;
  std::string variable;
  std::vector<NumericExpr> operands;
  SourceSpan span;

  static NumericExpr number(Rational v);
  static NumericExpr of_fluent(Atom f);
  static NumericExpr of_variable(std::string name);
  static NumericExpr current_time();
  static NumericExpr binary(Kind op, NumericExpr lhs, NumericExpr rhs);

  friend bool operator==(const NumericExpr&, const NumericExpr&) = default;
};

enum class CompareOp { Eq, Lt, Le, Gt, Ge };

const char* compare_symbol(CompareOp op);
CompareOp negate_compare(CompareOp op);

struct Formula {
  enum class Kind { Atom, Defined, Not, And, Or, Compare, Forall, Exists };

  Kind kind = Kind::And;
  Atom atom;                          // Atom, Defined
  CompareOp op = CompareOp::Eq;       // Compare
  std::vector<NumericExpr> operands;  // Compare: lhs, rhs
  std::vector<TypedVar> vars;         // Forall, Exists
  std::vector<Formula> children;      // Not: one; And/Or: any; quantifiers: one
  SourceSpan span;

  static Formula truth() { return Formula{}; }
  static Formula falsity();
  static Formula of_atom(Atom a);
  static Formula defined(Atom a);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> parts);
  static Formula disjunction(std::vector<Formula> parts);
  static Formula compare(CompareOp op, NumericExpr lhs, NumericExpr rhs);
  static Formula forall(std::vector<TypedVar> vars, Formula body);
  static Formula exists(std::vector<TypedVar> vars, Formula body);

  bool is_true() const { return kind == Kind::And && children.empty(); }
  bool is_literal() const;

  friend bool operator==(const Formula&, const Formula&) = default;
};

/// Negation normal form with flattened and/or; single-child and/or collapse
/// to the child, empty quantifiers to their body.
Formula normalize(Formula f);

/// normalize(not f).
Formula negate(const Formula& f);

/// Conjoins and normalizes.
Formula conjoin(const Formula& a, const Formula& b);

struct Effect {
  enum class Kind { Add, Delete, Assign, Increase, Timestamp, When };

  Kind kind = Kind::Add;
  Atom atom;                 // Add/Delete: the atom; numeric kinds: the fluent
  NumericExpr value;         // Assign, Increase
  Formula condition;         // When
  std::vector<Effect> then;  // When: primitive effects only
  SourceSpan span;

  static Effect add(Atom a);
  static Effect del(Atom a);
  static Effect assign(Atom fluent, NumericExpr v);
  static Effect increase(Atom fluent, NumericExpr v);
  static Effect timestamp(Atom fluent);
  static Effect when(Formula condition, std::vector<Effect> then);

  bool is_numeric() const {
    return kind == Kind::Assign || kind == Kind::Increase || kind == Kind::Timestamp;
  }

  friend bool operator==(const Effect&, const Effect&) = default;
};

/// Wraps e in a guard, merging with an existing guard.
Effect guard_effect(const Formula& guard, const Effect& e);

enum class TimeTag { AtStart, AtEnd, OverAll };

const char* time_tag_name(TimeTag tag);

struct TimedCondition {
  TimeTag tag = TimeTag::AtStart;
  Formula formula;

  friend bool operator==(const TimedCondition&, const TimedCondition&) = default;
};

struct TimedEffect {
  TimeTag tag = TimeTag::AtStart;
  Effect effect;

  friend bool operator==(const TimedEffect&, const TimedEffect&) = default;
};

struct DurationSpec {
  enum class Form { Fixed, Range };

  Form form = Form::Fixed;
  NumericExpr value;  // Fixed
  NumericExpr lo;     // Range
  NumericExpr hi;     // Range

  static DurationSpec fixed(NumericExpr v);
  static DurationSpec range(NumericExpr lo, NumericExpr hi);

  friend bool operator==(const DurationSpec&, const DurationSpec&) = default;
};

struct ActionSchema {
  enum class Kind { Simple, Durative };

  std::string name;
  Kind kind = Kind::Simple;
  std::vector<TypedVar> parameters;
  std::optional<DurationSpec> duration;
  std::vector<TimedCondition> conditions;
  std::vector<TimedEffect> effects;
  SourceSpan span;

  bool is_durative() const { return kind == Kind::Durative; }

  /// Conjunction of the at-start conditions.
  Formula start_condition() const;
  Formula condition_at(TimeTag tag) const;

  /// Simple actions keep a single precondition formula; durative actions get
  /// one more at-start entry.
  void add_precondition(const Formula& f);

  const TypedVar* find_parameter(const std::string& name) const;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct Definition {
  std::string name;
  std::vector<TypedVar> parameters;
  Formula body;
  SourceSpan span;

  friend bool operator==(const Definition&, const Definition&) = default;
};

struct TypeDecl {
  std::string name;
  std::string parent = kObjectType;

  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

/// Predicate or numeric-fluent signature.
struct PredicateDecl {
  std::string name;
  std::vector<TypedVar> parameters;
  SourceSpan span;

  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

struct Domain {
  std::string name;
  std::vector<TypeDecl> types;
  std::vector<PredicateDecl> predicates;
  std::vector<PredicateDecl> functions;
  std::vector<Definition> definitions;
  std::vector<ActionSchema> actions;

  const ActionSchema* find_action(const std::string& n) const;
  ActionSchema* find_action(const std::string& n);
  const PredicateDecl* find_predicate(const std::string& n) const;
  const PredicateDecl* find_function(const std::string& n) const;
  const Definition* find_definition(const std::string& n) const;

  bool has_type(const std::string& t) const;
  /// True if `sub` equals `super` or inherits from it.
  bool is_subtype(const std::string& sub, const std::string& super) const;

  /// Every name used by a type, predicate, function, definition or action.
  std::set<std::string> namespace_names() const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedVar> objects;
  std::vector<Atom> init_atoms;
  std::vector<std::pair<Atom, Rational>> init_fluents;
  Formula goal;

  const TypedVar* find_object(const std::string& n) const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct PlanStep {
  Rational time;
  std::string action;
  std::vector<Term> args;  // objects, or numbers for time-typed parameters
  std::optional<Rational> duration;
  int line = 0;

  std::string label() const;

  friend bool operator==(const PlanStep& a, const PlanStep& b) {
    return a.time == b.time && a.action == b.action && a.args == b.args &&
           a.duration == b.duration;
  }
};

/// Steps sorted by time; equal times keep file order.
using Plan = std::vector<PlanStep>;

/// Per-action input to the duration-range lowering: how each numeric fluent
/// evolves while the action runs, plus what happens if it is never stopped.
struct RateAnnotation {
  struct Rate {
    Atom fluent;
    NumericExpr rate;

    friend bool operator==(const Rate&, const Rate&) = default;
  };

  std::string action;
  std::vector<Rate> rates;
  std::vector<Effect> overrun;

  friend bool operator==(const RateAnnotation&, const RateAnnotation&) = default;
};

/// A named disjunction of activity predicates, e.g. must-be-stationary(?t).
struct DefinitionGroup {
  std::string name;
  std::vector<TypedVar> parameters;
  std::vector<std::string> members;

  friend bool operator==(const DefinitionGroup&, const DefinitionGroup&) = default;
};

using Binding = std::map<std::string, Term>;

/// Strict substitution: every free variable must be bound, otherwise a
/// ModelError names the first unbound one. Quantified variables shadow.
Formula substitute(const Formula& f, const Binding& b);
Effect substitute(const Effect& e, const Binding& b);
NumericExpr substitute(const NumericExpr& e, const Binding& b);
Atom substitute(const Atom& a, const Binding& b);

/// Lenient substitution used for renaming and partial instantiation: unbound
/// variables are left in place.
Formula rename(const Formula& f, const Binding& b);
Effect rename(const Effect& e, const Binding& b);
NumericExpr rename(const NumericExpr& e, const Binding& b);
Atom rename(const Atom& a, const Binding& b);

std::set<std::string> free_variables(const Formula& f);
std::set<std::string> free_variables(const Effect& e);
std::set<std::string> free_variables(const NumericExpr& e);
std::set<std::string> free_variables(const Atom& a);

/// Most general unifier of two atoms (variables may not be shared; rename
/// apart first). The returned binding is idempotent: no bound value contains a
/// bound variable.
std::optional<Binding> unify(const Atom& a, const Atom& b);

/// Checks the invariants of a parsed or transformed domain. Throws ModelError.
void check_domain(const Domain& d);

/// Throws ModelError if a definition refers to itself or to a later one.
void check_definitions_stratified(const Domain& d);

/// Visits every formula node in the domain's conditions (not definitions).
template <typename Fn>
void for_each_node(const Formula& f, Fn&& fn) {
  fn(f);
  for (const auto& c : f.children) for_each_node(c, fn);
}

}  // namespace tempolower
