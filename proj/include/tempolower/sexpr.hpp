#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tempolower/model.hpp"

namespace tempolower {

/// Parenthesized symbolic expression. Symbols are lower-cased on read.
struct SExpr {
  bool is_list = false;
  std::string symbol;
  std::vector<SExpr> items;
  SourceSpan span;

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  /// True for a list whose first item is the symbol `head`.
  bool has_head(std::string_view head) const {
    return is_list && !items.empty() && items.front().is_symbol(head);
  }
  std::string str() const;
};

/// Reads every top-level expression. Throws ModelError on unbalanced
/// parentheses, pointing at the unmatched one.
std::vector<SExpr> read_sexprs(std::string_view text, const std::string& file = {});

}  // namespace tempolower
