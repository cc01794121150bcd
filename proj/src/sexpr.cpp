#include "tempolower/sexpr.hpp"

#include <cctype>

namespace tempolower {

std::string SExpr::str() const {
  if (!is_list) return symbol;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += " ";
    out += items[i].str();
  }
  return out + ")";
}

namespace {

class Reader {
 public:
  Reader(std::string_view text, const std::string& file) : text_(text), file_(file) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    std::vector<SExpr> stack;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c == '(') {
        SExpr list;
        list.is_list = true;
        list.span = here();
        stack.push_back(std::move(list));
        advance();
      } else if (c == ')') {
        if (stack.empty()) throw ModelError("unbalanced parentheses: unexpected ')'", here(), ")");
        advance();
        SExpr done = std::move(stack.back());
        stack.pop_back();
        emit(std::move(done), stack, out);
      } else {
        SExpr sym;
        sym.span = here();
        while (pos_ < text_.size() && !is_delimiter(text_[pos_])) {
          sym.symbol.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text_[pos_]))));
          advance();
        }
        emit(std::move(sym), stack, out);
      }
    }
    if (!stack.empty()) {
      throw ModelError("unbalanced parentheses: '(' is never closed", stack.back().span, "(");
    }
    return out;
  }

 private:
  static bool is_delimiter(char c) {
    return c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c));
  }

  static void emit(SExpr e, std::vector<SExpr>& stack, std::vector<SExpr>& out) {
    if (stack.empty()) {
      out.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  SourceSpan here() const { return SourceSpan{file_, line_, column_}; }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text, const std::string& file) {
  return Reader(text, file).read_all();
}

}  // namespace tempolower
