#pragma once

// Shared helpers for the unit and acceptance suites: corpus access, name
// normalization for structural comparison, and running the CLI binary.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempolower/lowering.hpp"
#include "tempolower/model.hpp"

namespace tempolower::testing {

std::string corpus_path(const std::string& relative);
std::string golden_path(const std::string& relative);
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

Domain load_domain(const std::string& relative);
Problem load_problem(const std::string& relative, const Domain& d);
Plan load_plan(const std::string& relative);
std::vector<RateAnnotation> load_rates(const std::string& relative, const Domain& d);
std::vector<DefinitionGroup> load_groups(const std::string& relative, const Domain& d);

/// Renames whole tokens (names and ?variables) in PDDL text.
std::string rename_tokens(const std::string& text, const std::map<std::string, std::string>& names);

/// Orders predicates, functions, definitions, actions, condition conjuncts and
/// effects so that two domains differing only in listing order print equally.
Domain canonical(const Domain& d);

/// Prints `d` with `names` applied, re-parses it and canonicalizes it.
std::string canonical_text(const Domain& d, const std::map<std::string, std::string>& names = {});

/// One shipped instance: a directory holding domain.pddl and optionally
/// problem.pddl, rates.pddl and groups.pddl.
struct CorpusInstance {
  std::string name;  // e.g. "figure1", "micro/heat"
  Domain domain;
  std::optional<Problem> problem;
  std::vector<RateAnnotation> rates;
  std::vector<DefinitionGroup> groups;

  PipelineInput pipeline_input() const;
};

std::vector<CorpusInstance> corpus_instances();
/// Every file under the corpus, relative to it, sorted.
std::vector<std::string> corpus_files();

struct CommandResult {
  int status = -1;
  std::string out;
  std::string err;
};

/// Runs the tempolower binary with `args` (already shell-quoted) and an
/// optional environment prefix such as "TEMPOLOWER_COLOR=never".
CommandResult run_cli(const std::string& args, const std::string& env = "TEMPOLOWER_COLOR=never");

/// Fresh, empty scratch directory.
std::string scratch_dir(const std::string& name);

}  // namespace tempolower::testing
