#pragma once

// Timed-state progression: a state with a clock, a queue of delayed at-end
// effects, and (in pddl21 mode) the records of currently executing actions.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempolower/model.hpp"

namespace tempolower {

enum class Mode {
  /// Enforces (over all) and (at end) conditions through active records.
  Pddl21,
  /// Pure state progression; the domain must carry no temporal conditions.
  Lowered,
};

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& name);

struct TimedState {
  Rational clock = 0;
  std::set<Atom> atoms;
  std::map<Atom, Rational> fluents;

  std::string canonical() const;
};

/// Fires at `time`; guards are evaluated then, against the state at firing.
struct Event {
  Rational time;
  std::uint64_t sequence = 0;
  std::string source;            // e.g. "(load-truck truck1 depot crate1 crane1)@0"
  std::vector<Effect> effects;   // ground, ?duration already bound
};

/// Ordered by time, then insertion order.
class EventQueue {
 public:
  void push(Event e);
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }
  std::optional<Rational> next_time() const;
  const std::vector<Event>& events() const { return events_; }
  /// Removes and returns every event at the earliest time if that time
  /// satisfies `limit` (inclusive or exclusive).
  std::vector<Event> pop_batch(const Rational& limit, bool inclusive);

 private:
  std::vector<Event> events_;
};

/// A running durative action, tracked only in pddl21 mode.
struct ActiveRecord {
  std::string action;  // ground label
  Rational start;
  Rational end;
  std::vector<Formula> over_all;  // ground conjuncts
  Formula at_end;                 // ground
  std::uint64_t event = 0;        // sequence of its completion event
};

struct Violation {
  /// precondition | over-all | at-end | effect-conflict | goal | duration | evaluation
  std::string kind;
  Rational time;
  std::string culprit;
  std::string detail;
};

/// Raised by the progression functions; validate_plan turns it into a report.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(Violation v);
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

/// Read-only data for evaluation: definitions and the objects per type.
class EvalContext {
 public:
  EvalContext(const Domain& domain, const Problem& problem);

  const Domain& domain() const { return *domain_; }
  const Problem& problem() const { return *problem_; }
  /// Objects whose type is `type` or one of its subtypes, in declaration order.
  const std::vector<std::string>& objects_of(const std::string& type) const;

 private:
  const Domain* domain_;
  const Problem* problem_;
  mutable std::map<std::string, std::vector<std::string>> by_type_;
};

/// A schema with every parameter bound.
struct GroundAction {
  const ActionSchema* schema = nullptr;
  std::vector<Term> args;
  Binding binding;

  std::string label() const;
};

/// Checks arity, object existence and parameter types. Throws ModelError.
GroundAction ground_action(const EvalContext& ctx, const std::string& name, const std::vector<Term>& args);

TimedState initial_state(const Problem& p);

/// Throws SimulationError (kind evaluation) for fluents without a value,
/// unbound variables and division by zero.
Rational evaluate(const TimedState& s, const NumericExpr& e);
bool holds(const TimedState& s, const Formula& f, const EvalContext& ctx);

/// Everything a simulation carries between steps.
struct World {
  Mode mode = Mode::Lowered;
  TimedState state;
  EventQueue queue;
  std::vector<ActiveRecord> active;
  std::uint64_t next_sequence = 0;

  /// Atoms, fluents, clock, pending events and active records.
  std::string canonical() const;
  std::string digest() const;
};

World initial_world(const Problem& p, Mode mode);

/// Duration of a ground durative action in the current state: the fixed value,
/// or the range bounds.
struct DurationBounds {
  Rational lo;
  Rational hi;
};
std::optional<DurationBounds> duration_bounds(const World& w, const GroundAction& a);

/// Applies `a` at the current clock. `duration` is required for range actions
/// and must match fixed ones when given. Throws SimulationError.
void apply_action(World& w, const GroundAction& a, const std::optional<Rational>& duration,
                  const EvalContext& ctx);

/// Fires queued events up to `t` (inclusive) or strictly before `t`
/// (exclusive), then sets the clock to `t`. Throws SimulationError.
void advance_time(World& w, const Rational& t, const EvalContext& ctx, bool inclusive = true);

/// Fires every pending event.
void drain(World& w, const EvalContext& ctx);

struct TraceEntry {
  Rational time;
  std::string action;
  std::string digest;
};

struct ValidationReport {
  Mode mode = Mode::Lowered;
  bool valid = false;
  std::optional<Violation> violation;
  std::vector<TraceEntry> trace;
  bool goal_holds = false;
  Rational makespan = 0;
};

/// Throws ModelError for input errors: unknown actions or objects, wrong
/// arity, or a lowered-mode domain that still has temporal conditions.
ValidationReport validate_plan(const Domain& d, const Problem& p, const Plan& plan, Mode mode);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace tempolower
