#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tempolower/model.hpp"

namespace tempolower {

/// Parses a domain file. The result satisfies check_domain(); every error is a
/// ModelError carrying the offending token's span.
Domain parse_domain(std::string_view text, const std::string& file = {});

/// Parses a problem against an already parsed domain (types, arities and
/// declared names are checked).
Problem parse_problem(std::string_view text, const Domain& domain, const std::string& file = {});

/// Parses `TIME: (NAME ARGS...) [DURATION]` lines. Steps are stably sorted by
/// time. Blank lines and `;` comments are skipped.
Plan parse_plan(std::string_view text, const std::string& file = {});

/// Parses a `(:rates (ACTION (FLUENT RATE) ... [(:overrun EFFECT)]) ...)`
/// sidecar against the domain it annotates.
std::vector<RateAnnotation> parse_rates(std::string_view text, const Domain& domain,
                                        const std::string& file = {});

/// Parses a `(:groups (NAME (PARAMS) member ...) ...)` file.
std::vector<DefinitionGroup> parse_groups(std::string_view text, const Domain& domain,
                                          const std::string& file = {});

}  // namespace tempolower
