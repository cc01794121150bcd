#pragma once

// Bounded forward search over decision epochs, and the solvability
// comparison between an original model and its lowering.

#include <optional>
#include <string>
#include <vector>

#include "tempolower/lowering.hpp"
#include "tempolower/semantics.hpp"

namespace tempolower {

struct SearchBounds {
  Rational horizon = 20;
  std::size_t max_steps = 6;
  std::size_t max_nodes = 200000;
  std::size_t max_objects = 8;
  /// Off gives the slow reference enumeration used to cross-check pruning.
  bool prune_duplicates = true;
};

enum class SearchOutcome { Found, ProvenNone, BoundExceeded };

const char* outcome_name(SearchOutcome o);

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::ProvenNone;
  Plan plan;
  std::size_t expanded = 0;
  std::string note;
};

/// One applicable move: an action with its chosen duration.
struct Move {
  GroundAction action;
  std::optional<Rational> duration;
};

/// Ground instances of every schema whose object parameters range over the
/// problem objects; time-typed parameters take the values named by linking
/// equalities `(= (f ...) ?t)` in the current state.
std::vector<GroundAction> ground_candidates(const World& w, const EvalContext& ctx);

/// Candidate durations: none for instantaneous actions, the value for fixed
/// ones, and {lo, hi, every queued event time within [lo, hi]} for ranges.
std::vector<std::optional<Rational>> duration_candidates(const World& w, const GroundAction& a);

/// Moves that apply without a violation and end within the horizon. The
/// returned worlds have already fired zero-delay events.
std::vector<std::pair<Move, World>> successors(const World& w, const EvalContext& ctx, const Rational& horizon);

/// True if the goal holds once every pending event has fired without a
/// violation.
bool goal_reached(const World& w, const EvalContext& ctx);

SearchResult plan_search(const Domain& d, const Problem& p, Mode mode, const SearchBounds& bounds);

/// Rewrites a plan for the original model into one for the duration-range
/// lowering: a range action at t with duration d becomes start@t plus
/// stop@t+d, or start@t alone when d is the maximum.
Plan map_plan(const Domain& original, const Problem& p, const Plan& plan,
              const std::vector<RangeMapping>& mappings, std::vector<std::string>* notes = nullptr);

struct EquivalenceVerdict {
  std::string instance;
  SearchResult original;
  SearchResult lowered;
  /// Empty when either search hit a bound.
  std::optional<bool> agree;
  std::optional<Plan> mapped_plan;
  std::optional<ValidationReport> mapped_report;
  std::vector<std::string> notes;

  bool original_solvable() const { return original.outcome == SearchOutcome::Found; }
  bool lowered_solvable() const { return lowered.outcome == SearchOutcome::Found; }
};

EquivalenceVerdict check_equivalence(const std::string& instance, const Domain& original_domain,
                                     const Problem& original_problem, const Domain& lowered_domain,
                                     const Problem& lowered_problem,
                                     const std::vector<LoweringReport>& reports, const SearchBounds& bounds);

}  // namespace tempolower
