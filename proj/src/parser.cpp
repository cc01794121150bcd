#include "tempolower/parser.hpp"

#include <algorithm>
#include <map>

#include "tempolower/sexpr.hpp"

namespace tempolower {

namespace {

[[noreturn]] void fail(const std::string& message, const SExpr& at) {
  throw ModelError(message, at.span, at.is_list ? at.str() : at.symbol);
}

bool is_variable_token(const std::string& s) { return !s.empty() && s.front() == '?'; }

bool is_keyword(const SExpr& e) { return e.is_symbol() && !e.symbol.empty() && e.symbol.front() == ':'; }

void expect_list(const SExpr& e, const std::string& what) {
  if (!e.is_list) fail("expected " + what + ", found symbol '" + e.symbol + "'", e);
}

const std::string& expect_symbol(const SExpr& e, const std::string& what) {
  if (e.is_list) fail("expected " + what + ", found a list", e);
  return e.symbol;
}

/// `a b - t c - u d` in declaration order. Untyped trailing names get
/// `object`.
std::vector<TypedVar> parse_typed_list(const std::vector<SExpr>& items, std::size_t begin,
                                       bool variables) {
  std::vector<TypedVar> out;
  std::size_t pending = 0;
  for (std::size_t i = begin; i < items.size(); ++i) {
    const SExpr& item = items[i];
    const std::string& sym = expect_symbol(item, variables ? "a variable" : "a name");
    if (sym == "-") {
      if (i + 1 >= items.size() || pending == 0) fail("dangling '-' in typed list", item);
      const std::string& type = expect_symbol(items[i + 1], "a type name");
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].type = type;
      pending = 0;
      ++i;
      continue;
    }
    if (variables != is_variable_token(sym)) {
      fail(variables ? "expected a variable, found '" + sym + "'"
                     : "expected a name, found variable '" + sym + "'",
           item);
    }
    out.push_back({sym, kObjectType});
    ++pending;
  }
  return out;
}

struct Scope {
  const Domain& domain;
  std::map<std::string, std::string> vars;
  const Problem* problem = nullptr;
  bool allow_duration = false;

  void bind(const std::vector<TypedVar>& params, const SExpr& at) {
    for (const auto& p : params) {
      if (!domain.has_type(p.type)) fail("unknown type " + p.type, at);
      vars[p.name] = p.type;
    }
  }
};

class BodyParser {
 public:
  explicit BodyParser(Scope& scope) : scope_(scope) {}

  Term term(const SExpr& e, const std::string& expected_type) {
    const std::string& sym = expect_symbol(e, "a term");
    if (is_variable_token(sym)) {
      auto it = scope_.vars.find(sym);
      if (it == scope_.vars.end()) fail("unbound variable " + sym, e);
      if (is_numeric_type(it->second)) fail("numeric variable " + sym + " used as an object", e);
      check_type(it->second, expected_type, e);
      return Term::var(sym);
    }
    if (parse_rational(sym)) fail("number " + sym + " used as an object", e);
    if (scope_.problem == nullptr) fail("undeclared constant " + sym, e);
    const TypedVar* obj = scope_.problem->find_object(sym);
    if (obj == nullptr) fail("undeclared object " + sym, e);
    check_type(obj->type, expected_type, e);
    return Term::obj(sym);
  }

  Atom atom_args(const SExpr& e, const PredicateDecl& decl, std::size_t arg_count) {
    if (arg_count != decl.parameters.size()) {
      fail(decl.name + " expects " + std::to_string(decl.parameters.size()) + " arguments, got " +
               std::to_string(arg_count),
           e);
    }
    Atom out{decl.name, {}};
    for (std::size_t i = 0; i < arg_count; ++i) {
      out.args.push_back(term(e.items[i + 1], decl.parameters[i].type));
    }
    return out;
  }

  Atom fluent(const SExpr& e) {
    expect_list(e, "a numeric fluent");
    if (e.items.empty()) fail("empty fluent term", e);
    const std::string& name = expect_symbol(e.items.front(), "a function name");
    const PredicateDecl* decl = scope_.domain.find_function(name);
    if (decl == nullptr) fail("undeclared function " + name, e.items.front());
    return atom_args(e, *decl, e.items.size() - 1);
  }

  NumericExpr numeric(const SExpr& e) {
    NumericExpr out;
    if (e.is_symbol()) {
      if (auto value = parse_rational(e.symbol)) {
        out = NumericExpr::number(*value);
      } else if (e.symbol == kDurationVar) {
        if (!scope_.allow_duration) fail("?duration is not allowed here", e);
        out = NumericExpr::of_variable(e.symbol);
      } else if (is_variable_token(e.symbol)) {
        auto it = scope_.vars.find(e.symbol);
        if (it == scope_.vars.end()) fail("unbound variable " + e.symbol, e);
        if (!is_numeric_type(it->second)) fail("object variable " + e.symbol + " used as a number", e);
        out = NumericExpr::of_variable(e.symbol);
      } else {
        fail("expected a numeric expression, found '" + e.symbol + "'", e);
      }
      out.span = e.span;
      return out;
    }
    if (e.items.empty()) fail("empty numeric expression", e);
    const SExpr& head = e.items.front();
    if (head.is_symbol("current-time")) {
      if (e.items.size() != 1) fail("current-time takes no arguments", e);
      out = NumericExpr::current_time();
    } else if (head.is_symbol("-") && e.items.size() == 2) {
      out.kind = NumericExpr::Kind::Negate;
      out.operands.push_back(numeric(e.items[1]));
    } else if (head.is_symbol("+") || head.is_symbol("-") || head.is_symbol("*") ||
               head.is_symbol("/")) {
      if (e.items.size() != 3) fail("arithmetic operator " + head.symbol + " is binary", e);
      static const std::map<std::string, NumericExpr::Kind> ops = {
          {"+", NumericExpr::Kind::Add},
          {"-", NumericExpr::Kind::Sub},
          {"*", NumericExpr::Kind::Mul},
          {"/", NumericExpr::Kind::Div}};
      out = NumericExpr::binary(ops.at(head.symbol), numeric(e.items[1]), numeric(e.items[2]));
    } else {
      out = NumericExpr::of_fluent(fluent(e));
    }
    out.span = e.span;
    return out;
  }

  Formula formula(const SExpr& e) {
    Formula out = formula_raw(e);
    return normalize(std::move(out));
  }

  Formula formula_raw(const SExpr& e) {
    if (e.is_symbol()) fail("expected a formula, found '" + e.symbol + "'", e);
    if (e.items.empty()) fail("empty formula", e);
    const SExpr& head = e.items.front();
    if (head.is_list) fail("expected a predicate or connective", head);
    const std::string& h = head.symbol;
    Formula out;

    if (h == "and" || h == "or") {
      std::vector<Formula> parts;
      for (std::size_t i = 1; i < e.items.size(); ++i) parts.push_back(formula_raw(e.items[i]));
      out = h == "and" ? Formula::conjunction(std::move(parts))
                       : Formula::disjunction(std::move(parts));
    } else if (h == "not") {
      if (e.items.size() != 2) fail("not takes exactly one formula", e);
      out = Formula::negation(formula_raw(e.items[1]));
    } else if (h == "forall" || h == "exists") {
      if (e.items.size() != 3) fail(h + " takes a variable list and a formula", e);
      expect_list(e.items[1], "a variable list");
      auto vars = parse_typed_list(e.items[1].items, 0, true);
      auto saved = scope_.vars;
      scope_.bind(vars, e.items[1]);
      Formula body = formula_raw(e.items[2]);
      scope_.vars = std::move(saved);
      out = h == "forall" ? Formula::forall(std::move(vars), std::move(body))
                          : Formula::exists(std::move(vars), std::move(body));
    } else if (h == "=" || h == "<" || h == "<=" || h == ">" || h == ">=") {
      if (e.items.size() != 3) fail("comparison " + h + " is binary", e);
      static const std::map<std::string, CompareOp> ops = {{"=", CompareOp::Eq},
                                                           {"<", CompareOp::Lt},
                                                           {"<=", CompareOp::Le},
                                                           {">", CompareOp::Gt},
                                                           {">=", CompareOp::Ge}};
      out = Formula::compare(ops.at(h), numeric(e.items[1]), numeric(e.items[2]));
    } else if (const PredicateDecl* pred = scope_.domain.find_predicate(h)) {
      out = Formula::of_atom(atom_args(e, *pred, e.items.size() - 1));
    } else if (const Definition* def = scope_.domain.find_definition(h)) {
      PredicateDecl sig{def->name, def->parameters, def->span};
      out = Formula::defined(atom_args(e, sig, e.items.size() - 1));
    } else if (scope_.domain.find_function(h) != nullptr) {
      fail("numeric fluent " + h + " used as a condition", e);
    } else if (is_keyword(head) || h == "at" || h == "over" || h == "when") {
      fail("unexpected keyword " + h + " in formula", head);
    } else {
      fail("undeclared predicate " + h, head);
    }
    out.span = e.span;
    return out;
  }

  /// Appends the flattened effects of `e`.
  void effect(const SExpr& e, std::vector<Effect>& out) {
    expect_list(e, "an effect");
    if (e.items.empty()) fail("empty effect", e);
    const SExpr& head = e.items.front();
    if (head.is_list) fail("expected an effect keyword or predicate", head);
    const std::string& h = head.symbol;

    if (h == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) effect(e.items[i], out);
      return;
    }
    if (h == "when") {
      if (e.items.size() != 3) fail("when takes a condition and an effect", e);
      Formula guard = formula(e.items[1]);
      std::vector<Effect> inner;
      effect(e.items[2], inner);
      std::vector<Effect> primitives;
      std::vector<Effect> nested;
      for (auto& x : inner) {
        if (x.kind == Effect::Kind::When) {
          nested.push_back(guard_effect(guard, x));
        } else {
          primitives.push_back(std::move(x));
        }
      }
      if (!primitives.empty()) {
        Effect w = Effect::when(guard, std::move(primitives));
        w.span = e.span;
        out.push_back(std::move(w));
      }
      for (auto& n : nested) out.push_back(std::move(n));
      return;
    }
    Effect result;
    if (h == "not") {
      if (e.items.size() != 2) fail("not takes exactly one atom", e);
      result = Effect::del(effect_atom(e.items[1]));
    } else if (h == "assign" || h == "increase") {
      if (e.items.size() != 3) fail(h + " takes a fluent and an expression", e);
      Atom f = fluent(e.items[1]);
      NumericExpr v = numeric(e.items[2]);
      result = h == "assign" ? Effect::assign(std::move(f), std::move(v))
                             : Effect::increase(std::move(f), std::move(v));
    } else if (const PredicateDecl* fn = scope_.domain.find_function(h)) {
      // Timestamp record: (F args... (current-time))
      const SExpr& last = e.items.back();
      if (e.items.size() != fn->parameters.size() + 2 || !last.has_head("current-time") ||
          last.items.size() != 1) {
        fail("numeric fluent " + h + " used as an effect; expected (" + h +
                 " args... (current-time))",
             e);
      }
      result = Effect::timestamp(atom_args(e, *fn, fn->parameters.size()));
    } else if (h == "at" && e.items.size() == 3 &&
               (e.items[1].is_symbol("start") || e.items[1].is_symbol("end")) &&
               e.items[2].is_list) {
      fail("time-tagged effect is only allowed at the top level of a durative action", e);
    } else {
      result = Effect::add(effect_atom(e));
    }
    result.span = e.span;
    out.push_back(std::move(result));
  }

  Atom effect_atom(const SExpr& e) {
    expect_list(e, "an atom");
    if (e.items.empty()) fail("empty atom", e);
    const std::string& name = expect_symbol(e.items.front(), "a predicate");
    const PredicateDecl* pred = scope_.domain.find_predicate(name);
    if (pred == nullptr) {
      if (scope_.domain.find_definition(name) != nullptr) {
        fail("defined predicate " + name + " cannot appear in an effect", e);
      }
      fail("undeclared predicate " + name, e.items.front());
    }
    return atom_args(e, *pred, e.items.size() - 1);
  }

  Scope& scope() { return scope_; }

 private:
  void check_type(const std::string& actual, const std::string& expected, const SExpr& at) {
    const Domain& d = scope_.domain;
    if (d.is_subtype(actual, expected) || d.is_subtype(expected, actual)) return;
    fail("type mismatch: " + at.symbol + " is " + actual + ", expected " + expected, at);
  }

  Scope& scope_;
};

std::optional<TimeTag> time_tag_of(const SExpr& e) {
  if (!e.is_list || e.items.size() != 3 || !e.items[2].is_list) return std::nullopt;
  if (e.items[0].is_symbol("at") && e.items[1].is_symbol("start")) return TimeTag::AtStart;
  if (e.items[0].is_symbol("at") && e.items[1].is_symbol("end")) return TimeTag::AtEnd;
  if (e.items[0].is_symbol("over") && e.items[1].is_symbol("all")) return TimeTag::OverAll;
  return std::nullopt;
}

const std::vector<SExpr>& conjuncts(const SExpr& e, std::vector<SExpr>& storage) {
  if (e.has_head("and")) {
    storage.assign(e.items.begin() + 1, e.items.end());
  } else {
    storage = {e};
  }
  return storage;
}

DurationSpec parse_duration(const SExpr& e, BodyParser& body) {
  auto bound = [&](const SExpr& c) -> std::pair<std::string, NumericExpr> {
    expect_list(c, "a duration constraint");
    if (c.items.size() != 3 || !c.items[1].is_symbol(kDurationVar)) {
      fail("duration constraint must have the form (OP ?duration EXPR)", c);
    }
    const std::string& op = expect_symbol(c.items[0], "a comparison");
    if (op == "<" || op == ">") fail("only closed duration ranges are supported", c);
    if (op != "=" && op != "<=" && op != ">=") fail("unknown duration comparison " + op, c);
    return {op, body.numeric(c.items[2])};
  };

  std::vector<SExpr> storage;
  const auto& parts = conjuncts(e, storage);
  if (parts.size() == 1) {
    auto [op, value] = bound(parts.front());
    if (op == "=") return DurationSpec::fixed(std::move(value));
    if (op == "<=") return DurationSpec::range(NumericExpr::number(0), std::move(value));
    fail("a lone lower bound does not define a duration range", e);
  }
  if (parts.size() == 2) {
    auto a = bound(parts[0]);
    auto b = bound(parts[1]);
    if (a.first == ">=" && b.first == "<=") return DurationSpec::range(a.second, b.second);
    if (a.first == "<=" && b.first == ">=") return DurationSpec::range(b.second, a.second);
  }
  fail("unsupported duration specification", e);
}

ActionSchema parse_action(const SExpr& e, const Domain& domain) {
  bool durative = e.items.front().is_symbol(":durative-action");
  if (e.items.size() < 2) fail("action without a name", e);
  ActionSchema a;
  a.name = expect_symbol(e.items[1], "an action name");
  a.kind = durative ? ActionSchema::Kind::Durative : ActionSchema::Kind::Simple;
  a.span = e.span;

  std::map<std::string, const SExpr*> fields;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const SExpr& key = e.items[i];
    if (!is_keyword(key)) fail("expected an action field keyword", key);
    static const std::vector<std::string> simple_keys = {":parameters", ":precondition", ":effect"};
    static const std::vector<std::string> durative_keys = {":parameters", ":duration",
                                                           ":precondition", ":condition", ":effect"};
    const auto& allowed = durative ? durative_keys : simple_keys;
    if (std::find(allowed.begin(), allowed.end(), key.symbol) == allowed.end()) {
      fail("unknown keyword " + key.symbol + " in action " + a.name, key);
    }
    if (i + 1 >= e.items.size()) fail("missing value for " + key.symbol, key);
    if (fields.count(key.symbol) != 0) fail("duplicate field " + key.symbol, key);
    fields[key.symbol] = &e.items[i + 1];
  }
  if (fields.count(":precondition") != 0 && fields.count(":condition") != 0) {
    fail("action " + a.name + " has both :precondition and :condition", e);
  }

  Scope scope{domain, {}, nullptr, false};
  if (auto it = fields.find(":parameters"); it != fields.end()) {
    expect_list(*it->second, "a parameter list");
    a.parameters = parse_typed_list(it->second->items, 0, true);
    std::set<std::string> seen;
    for (const auto& p : a.parameters) {
      if (!seen.insert(p.name).second) fail("duplicate parameter " + p.name, *it->second);
    }
    scope.bind(a.parameters, *it->second);
  }
  BodyParser body(scope);

  if (durative) {
    auto it = fields.find(":duration");
    if (it == fields.end()) fail("durative action " + a.name + " has no :duration", e);
    a.duration = parse_duration(*it->second, body);
  }

  const SExpr* cond = nullptr;
  if (auto it = fields.find(":precondition"); it != fields.end()) cond = it->second;
  if (auto it = fields.find(":condition"); it != fields.end()) cond = it->second;
  if (cond != nullptr) {
    if (!durative) {
      a.conditions.push_back({TimeTag::AtStart, body.formula(*cond)});
    } else {
      std::vector<SExpr> storage;
      for (const auto& item : conjuncts(*cond, storage)) {
        if (auto tag = time_tag_of(item)) {
          a.conditions.push_back({*tag, body.formula(item.items[2])});
        } else {
          a.conditions.push_back({TimeTag::AtStart, body.formula(item)});
        }
      }
    }
  }

  if (auto it = fields.find(":effect"); it != fields.end()) {
    std::vector<SExpr> storage;
    const auto& items = durative ? conjuncts(*it->second, storage) : (storage = {*it->second});
    for (const auto& item : items) {
      TimeTag tag = TimeTag::AtStart;
      const SExpr* inner = &item;
      if (auto t = time_tag_of(item); t && durative) {
        if (*t == TimeTag::OverAll) fail("over all is not an effect time", item);
        tag = *t;
        inner = &item.items[2];
      }
      scope.allow_duration = tag == TimeTag::AtEnd;
      std::vector<Effect> effects;
      body.effect(*inner, effects);
      for (auto& x : effects) a.effects.push_back({tag, std::move(x)});
    }
    scope.allow_duration = false;
  }
  return a;
}

void parse_signatures(const SExpr& section, const Domain& domain, std::vector<PredicateDecl>& out,
                      bool functions) {
  for (std::size_t i = 1; i < section.items.size(); ++i) {
    const SExpr& item = section.items[i];
    if (functions && item.is_symbol("-")) {
      // PDDL 3.1 style `- number` result type after a function declaration.
      if (i + 1 >= section.items.size() || !section.items[i + 1].is_symbol("number")) {
        fail("function result type must be number", item);
      }
      ++i;
      continue;
    }
    expect_list(item, functions ? "a function declaration" : "a predicate declaration");
    if (item.items.empty()) fail("empty declaration", item);
    PredicateDecl decl;
    decl.name = expect_symbol(item.items.front(), "a name");
    decl.parameters = parse_typed_list(item.items, 1, true);
    decl.span = item.span;
    for (const auto& p : decl.parameters) {
      if (!domain.has_type(p.type)) fail("unknown type " + p.type, item);
    }
    out.push_back(std::move(decl));
  }
}

const SExpr& single_define(const std::vector<SExpr>& top, const std::string& what,
                           const std::string& file) {
  if (top.size() != 1) {
    SourceSpan span{file, 1, 1};
    if (top.size() > 1) span = top[1].span;
    throw ModelError("expected exactly one (define (" + what + " ...)) form", span);
  }
  const SExpr& def = top.front();
  if (!def.has_head("define")) fail("expected (define ...)", def);
  if (def.items.size() < 2 || !def.items[1].has_head(what) || def.items[1].items.size() != 2) {
    fail("expected (" + what + " NAME) after define", def);
  }
  return def;
}

void rethrow_with_span(const ModelError& err, const SExpr& at) {
  if (err.span().line > 0) throw err;
  throw ModelError(err.message(), at.span, err.token());
}

}  // namespace

Domain parse_domain(std::string_view text, const std::string& file) {
  auto top = read_sexprs(text, file);
  const SExpr& def = single_define(top, "domain", file);

  Domain d;
  d.name = expect_symbol(def.items[1].items[1], "a domain name");

  std::vector<const SExpr*> derived;
  std::vector<const SExpr*> actions;
  std::set<std::string> seen_sections;
  for (std::size_t i = 2; i < def.items.size(); ++i) {
    const SExpr& section = def.items[i];
    expect_list(section, "a domain section");
    if (section.items.empty() || !is_keyword(section.items.front())) {
      fail("expected a domain section keyword", section);
    }
    const std::string& key = section.items.front().symbol;
    if (key == ":types" || key == ":predicates" || key == ":functions") {
      if (!seen_sections.insert(key).second) fail("duplicate section " + key, section);
    }
    if (key == ":types") {
      for (auto& t : parse_typed_list(section.items, 1, false)) {
        if (t.name == kObjectType || is_numeric_type(t.name)) fail("cannot redeclare builtin type " + t.name, section);
        d.types.push_back({t.name, t.type});
      }
      for (std::size_t k = 0; k < d.types.size(); ++k) {
        std::string parent = d.types[k].parent;
        if (!d.has_type(parent)) {
          if (is_numeric_type(parent)) fail("a type cannot extend " + parent, section);
          d.types.push_back({parent, kObjectType});
        }
      }
    } else if (key == ":predicates") {
      parse_signatures(section, d, d.predicates, false);
    } else if (key == ":functions") {
      parse_signatures(section, d, d.functions, true);
    } else if (key == ":derived") {
      derived.push_back(&section);
    } else if (key == ":action" || key == ":durative-action") {
      actions.push_back(&section);
    } else {
      fail("unknown keyword " + key, section.items.front());
    }
  }

  // Definition heads first so that bodies and actions can refer to them.
  for (const SExpr* section : derived) {
    if (section->items.size() != 3) fail("(:derived (NAME PARAMS) FORMULA) expected", *section);
    const SExpr& head = section->items[1];
    expect_list(head, "a definition head");
    if (head.items.empty()) fail("empty definition head", head);
    Definition def_item;
    def_item.name = expect_symbol(head.items.front(), "a definition name");
    def_item.parameters = parse_typed_list(head.items, 1, true);
    def_item.span = section->span;
    if (d.find_predicate(def_item.name) != nullptr || d.find_definition(def_item.name) != nullptr) {
      fail("duplicate predicate " + def_item.name, head.items.front());
    }
    d.definitions.push_back(std::move(def_item));
  }
  for (std::size_t i = 0; i < derived.size(); ++i) {
    Scope scope{d, {}, nullptr, false};
    scope.bind(d.definitions[i].parameters, derived[i]->items[1]);
    BodyParser body(scope);
    d.definitions[i].body = body.formula(derived[i]->items[2]);
  }

  for (const SExpr* section : actions) {
    ActionSchema a = parse_action(*section, d);
    if (d.find_action(a.name) != nullptr) fail("duplicate action " + a.name, section->items[1]);
    d.actions.push_back(std::move(a));
  }

  try {
    check_domain(d);
  } catch (const ModelError& err) {
    rethrow_with_span(err, def);
  }
  return d;
}

Problem parse_problem(std::string_view text, const Domain& domain, const std::string& file) {
  auto top = read_sexprs(text, file);
  const SExpr& def = single_define(top, "problem", file);

  Problem p;
  p.name = expect_symbol(def.items[1].items[1], "a problem name");
  bool has_goal = false;
  for (std::size_t i = 2; i < def.items.size(); ++i) {
    const SExpr& section = def.items[i];
    expect_list(section, "a problem section");
    if (section.items.empty() || !is_keyword(section.items.front())) {
      fail("expected a problem section keyword", section);
    }
    const std::string& key = section.items.front().symbol;
    Scope scope{domain, {}, &p, false};
    BodyParser body(scope);
    if (key == ":domain") {
      if (section.items.size() != 2) fail("(:domain NAME) expected", section);
      p.domain_name = expect_symbol(section.items[1], "a domain name");
      if (p.domain_name != domain.name) {
        fail("problem is for domain " + p.domain_name + ", not " + domain.name, section.items[1]);
      }
    } else if (key == ":objects") {
      for (auto& o : parse_typed_list(section.items, 1, false)) {
        if (!domain.has_type(o.type) || is_numeric_type(o.type)) {
          fail("unknown type " + o.type, section);
        }
        if (p.find_object(o.name) != nullptr) fail("duplicate object " + o.name, section);
        p.objects.push_back(std::move(o));
      }
    } else if (key == ":init") {
      for (std::size_t k = 1; k < section.items.size(); ++k) {
        const SExpr& item = section.items[k];
        expect_list(item, "an init atom");
        if (item.has_head("=")) {
          if (item.items.size() != 3) fail("(= FLUENT NUMBER) expected", item);
          Atom f = body.fluent(item.items[1]);
          auto value = parse_rational(item.items[2].is_symbol() ? item.items[2].symbol : "");
          if (!value) fail("initial fluent value must be a number", item.items[2]);
          p.init_fluents.emplace_back(std::move(f), *value);
        } else {
          std::vector<Effect> effects;
          body.effect(item, effects);
          if (effects.size() != 1 || effects.front().kind != Effect::Kind::Add) {
            fail("init entries must be ground atoms", item);
          }
          p.init_atoms.push_back(effects.front().atom);
        }
      }
    } else if (key == ":goal") {
      if (section.items.size() != 2) fail("(:goal FORMULA) expected", section);
      p.goal = body.formula(section.items[1]);
      has_goal = true;
    } else {
      fail("unknown keyword " + key, section.items.front());
    }
  }
  if (p.domain_name.empty()) fail("problem has no (:domain ...) section", def);
  if (!has_goal) p.goal = Formula::truth();
  return p;
}

Plan parse_plan(std::string_view text, const std::string& file) {
  Plan plan;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    line = line.substr(first);

    SourceSpan span{file, line_no, static_cast<int>(first) + 1};
    auto bad = [&](const std::string& why) {
      throw ModelError("malformed plan line " + std::to_string(line_no) + ": " + why, span,
                       std::string(line));
    };

    auto colon = line.find(':');
    if (colon == std::string_view::npos) bad("expected 'TIME: (ACTION ARGS...) [DURATION]'");
    std::string time_text(line.substr(0, colon));
    time_text.erase(time_text.find_last_not_of(" \t") + 1);
    auto time = parse_rational(time_text);
    if (!time) bad("invalid time '" + time_text + "'");
    if (*time < 0) bad("negative time " + time_text);

    std::string_view rest = line.substr(colon + 1);
    auto open = rest.find('(');
    auto close = rest.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
      bad("expected a parenthesized action");
    }
    auto exprs = read_sexprs(rest.substr(open, close - open + 1), file);
    if (exprs.size() != 1 || exprs.front().items.empty()) bad("expected (ACTION ARGS...)");

    PlanStep step;
    step.time = *time;
    step.line = line_no;
    const SExpr& call = exprs.front();
    for (const auto& item : call.items) {
      if (item.is_list) bad("nested list in action");
    }
    step.action = call.items.front().symbol;
    for (std::size_t i = 1; i < call.items.size(); ++i) {
      const std::string& arg = call.items[i].symbol;
      if (auto n = parse_rational(arg)) {
        step.args.push_back(Term::num(*n));
      } else {
        step.args.push_back(Term::obj(arg));
      }
    }

    std::string_view tail = rest.substr(close + 1);
    auto tail_start = tail.find_first_not_of(" \t\r");
    if (tail_start != std::string_view::npos) {
      tail = tail.substr(tail_start);
      auto tail_end = tail.find_last_not_of(" \t\r");
      tail = tail.substr(0, tail_end + 1);
      if (tail.size() < 2 || tail.front() != '[' || tail.back() != ']') {
        bad("trailing text after action");
      }
      std::string d(tail.substr(1, tail.size() - 2));
      auto value = parse_rational(d);
      if (!value) bad("invalid duration '" + d + "'");
      if (*value < 0) bad("negative duration " + d);
      step.duration = *value;
    }
    plan.push_back(std::move(step));
  }
  std::stable_sort(plan.begin(), plan.end(),
                   [](const PlanStep& a, const PlanStep& b) { return a.time < b.time; });
  return plan;
}

std::vector<RateAnnotation> parse_rates(std::string_view text, const Domain& domain,
                                        const std::string& file) {
  auto top = read_sexprs(text, file);
  std::vector<RateAnnotation> out;
  for (const auto& form : top) {
    if (!form.has_head(":rates")) fail("expected (:rates ...)", form);
    for (std::size_t i = 1; i < form.items.size(); ++i) {
      const SExpr& entry = form.items[i];
      expect_list(entry, "a rate entry (ACTION (FLUENT RATE) ...)");
      if (entry.items.empty()) fail("empty rate entry", entry);
      RateAnnotation ann;
      ann.action = expect_symbol(entry.items.front(), "an action name");
      const ActionSchema* action = domain.find_action(ann.action);
      if (action == nullptr) fail("rate annotation for unknown action " + ann.action, entry.items.front());
      for (const auto& existing : out) {
        if (existing.action == ann.action) fail("duplicate rate annotation for " + ann.action, entry);
      }
      Scope scope{domain, {}, nullptr, false};
      scope.bind(action->parameters, entry);
      BodyParser body(scope);
      for (std::size_t k = 1; k < entry.items.size(); ++k) {
        const SExpr& item = entry.items[k];
        expect_list(item, "(FLUENT RATE) or (:overrun EFFECT)");
        if (item.has_head(":overrun")) {
          if (item.items.size() != 2) fail("(:overrun EFFECT) expected", item);
          body.effect(item.items[1], ann.overrun);
          continue;
        }
        if (item.items.size() != 2) fail("(FLUENT RATE) expected", item);
        if (item.items[0].is_list && !item.items[0].items.empty() &&
            item.items[0].items[0].is_symbol() &&
            domain.find_function(item.items[0].items[0].symbol) == nullptr) {
          fail("rate references unknown fluent " + item.items[0].items[0].symbol, item.items[0]);
        }
        RateAnnotation::Rate rate;
        rate.fluent = body.fluent(item.items[0]);
        rate.rate = body.numeric(item.items[1]);
        ann.rates.push_back(std::move(rate));
      }
      out.push_back(std::move(ann));
    }
  }
  return out;
}

std::vector<DefinitionGroup> parse_groups(std::string_view text, const Domain& domain,
                                          const std::string& file) {
  auto top = read_sexprs(text, file);
  std::vector<DefinitionGroup> out;
  for (const auto& form : top) {
    if (!form.has_head(":groups")) fail("expected (:groups ...)", form);
    for (std::size_t i = 1; i < form.items.size(); ++i) {
      const SExpr& entry = form.items[i];
      expect_list(entry, "a group (NAME (PARAMS) member ...)");
      if (entry.items.size() < 2) fail("group needs a name and a parameter list", entry);
      DefinitionGroup g;
      g.name = expect_symbol(entry.items[0], "a group name");
      expect_list(entry.items[1], "a parameter list");
      g.parameters = parse_typed_list(entry.items[1].items, 0, true);
      for (const auto& p : g.parameters) {
        if (!domain.has_type(p.type)) fail("unknown type " + p.type, entry.items[1]);
      }
      for (std::size_t k = 2; k < entry.items.size(); ++k) {
        g.members.push_back(expect_symbol(entry.items[k], "a member predicate"));
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace tempolower
