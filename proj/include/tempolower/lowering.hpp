#pragma once

// Source-to-source passes that remove (over all) conditions, (at end)
// conditions and duration ranges, plus the definition layer used to name
// groups of activities.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tempolower/model.hpp"

namespace tempolower {

/// Atom with a polarity, as found in an (over all) conjunction.
struct Literal {
  Atom atom;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// One effect of `interferer` that can falsify a fact protected by an
/// (over all) condition of `protector`.
struct InterferenceEdge {
  std::string protector;
  Literal protected_literal;  // protector's variables renamed apart
  std::string interferer;
  Effect effect;              // the add/delete that unifies with the negation
  TimeTag effect_time = TimeTag::AtStart;
  Binding binding;            // unifier of the two atoms
};

struct RangeMapping {
  std::string original;
  std::string start;
  std::string stop;
  std::size_t timestamp_parameters = 0;
};

struct LoweringReport {
  std::string pass;
  std::vector<std::string> synthesized;
  std::vector<std::string> modified_actions;
  std::vector<std::pair<std::string, std::string>> added_preconditions;  // action, formula
  std::vector<std::string> goal_augmentations;
  std::vector<std::string> warnings;
  /// synthesized name -> what it stands for, e.g. failed-load-truck -> load-truck
  std::vector<std::pair<std::string, std::string>> name_notes;
  std::vector<RangeMapping> range_mappings;

  void note_modified(const std::string& action);
};

struct LoweringResult {
  Domain domain;
  LoweringReport report;
};

/// Which parameters a synthesized progressive predicate takes.
enum class ProgressiveParameters {
  /// The first argument of each protected literal (the object whose state is
  /// protected), e.g. `(at ?t ?l)` gives `ongoing-load-truck(?t)`.
  Subject,
  /// Every action parameter occurring in any protected literal.
  AllOccurring,
};

struct OverAllOptions {
  ProgressiveParameters parameters = ProgressiveParameters::Subject;
};

/// Returns `base` if it is not taken, else base-2, base-3, ...
std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

/// Conservative, purely syntactic. Throws ModelError naming the action when an
/// (over all) condition is not a conjunction of literals.
std::vector<InterferenceEdge> detect_interference(const Domain& d);

LoweringResult lower_over_all(const Domain& d, const OverAllOptions& options = {});

LoweringResult synthesize_definitions(const Domain& d, const std::vector<DefinitionGroup>& groups);

/// Replaces defined atoms by their bodies everywhere; the result has no
/// definitions.
Domain expand_definitions(const Domain& d);
Problem expand_definitions(const Domain& d, const Problem& p);
/// Expands the defined atoms of one formula.
Formula expand_definitions(const Domain& d, const Formula& f);

struct AtEndResult {
  Domain domain;
  Problem problem;
  LoweringReport report;
};

AtEndResult lower_at_end_conditions(const Domain& d, const Problem& p);

/// Throws ModelError for a range action without annotation.
LoweringResult lower_duration_range(const Domain& d, const std::vector<RateAnnotation>& rates);

enum class Pass { DurationRange, OverAll, AtEnd, SynthDefs, ExpandDefs };

const char* pass_name(Pass p);
std::optional<Pass> parse_pass_name(const std::string& name);
/// Pipeline order: duration-range, over-all, at-end, synth-defs, expand-defs.
std::vector<Pass> default_pipeline();

struct PipelineInput {
  std::vector<Pass> passes = default_pipeline();
  std::vector<RateAnnotation> rates;
  std::vector<DefinitionGroup> groups;
  OverAllOptions over_all;
};

struct PipelineResult {
  Domain domain;
  Problem problem;
  std::vector<LoweringReport> reports;
};

/// Runs the selected passes in pipeline order regardless of the order given.
PipelineResult run_pipeline(const Domain& d, const Problem& p, const PipelineInput& input);

/// Counts of the constructs the pipeline removes.
struct TemporalFeatures {
  std::size_t over_all = 0;
  std::size_t at_end_conditions = 0;
  std::size_t range_durations = 0;

  bool markovian() const { return over_all == 0 && at_end_conditions == 0 && range_durations == 0; }
};

TemporalFeatures count_temporal_features(const Domain& d);

}  // namespace tempolower
