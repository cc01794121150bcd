#pragma once

#include <string>
#include <vector>

#include "tempolower/model.hpp"

namespace tempolower {

// Deterministic printers. Output re-parses to a structurally equal value.

std::string print_expr(const NumericExpr& e);
std::string print_formula(const Formula& f);
std::string print_effect(const Effect& e);
std::string print_domain(const Domain& d);
std::string print_problem(const Problem& p);
std::string print_plan(const Plan& plan);
std::string print_rates(const std::vector<RateAnnotation>& rates);

}  // namespace tempolower
