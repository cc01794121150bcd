#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tempolower/lowering.hpp"
#include "tempolower/parser.hpp"
#include "tempolower/printer.hpp"
#include "tempolower/report.hpp"
#include "tempolower/search.hpp"
#include "tempolower/semantics.hpp"

namespace tempolower::cli {

namespace {

/// Usage or input problem; always exit status 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool use_color(const std::ostream& err) {
  const char* env = std::getenv("TEMPOLOWER_COLOR");
  std::string value = env != nullptr ? env : "auto";
  if (value == "never") return false;
  if (value != "auto") throw InputError("TEMPOLOWER_COLOR must be never or auto, not " + value);
  return &err == &std::cerr && isatty(STDERR_FILENO) != 0;
}

struct Options {
  std::string domain;
  std::string problem;
  std::string plan;
  std::string rates;
  std::string groups;
  std::string passes;
  std::string progressive = "subject";
  std::string mode = "pddl21";
  std::string format = "text";
  std::string output;
  std::string problem_output;
  std::string report;
  std::string horizon = "20";
  std::size_t max_steps = 6;
  std::size_t max_nodes = 200000;
  std::size_t max_objects = 8;
  bool no_prune = false;
};

struct Inputs {
  Domain domain;
  std::optional<Problem> problem;
  std::vector<RateAnnotation> rates;
  std::vector<DefinitionGroup> groups;
};

Inputs load(const Options& o) {
  Inputs in;
  in.domain = parse_domain(read_file(o.domain), o.domain);
  if (!o.problem.empty()) in.problem = parse_problem(read_file(o.problem), in.domain, o.problem);
  if (!o.rates.empty()) in.rates = parse_rates(read_file(o.rates), in.domain, o.rates);
  if (!o.groups.empty()) in.groups = parse_groups(read_file(o.groups), in.domain, o.groups);
  return in;
}

Mode mode_of(const Options& o) {
  auto m = parse_mode(o.mode);
  if (!m) throw InputError("unknown mode " + o.mode + " (pddl21 or lowered)");
  return *m;
}

bool json_format(const Options& o) {
  if (o.format != "text" && o.format != "json") throw InputError("unknown format " + o.format + " (text or json)");
  return o.format == "json";
}

PipelineInput pipeline_input(const Options& o, const Inputs& in) {
  PipelineInput p;
  if (!o.passes.empty()) {
    p.passes.clear();
    std::stringstream list(o.passes);
    std::string name;
    while (std::getline(list, name, ',')) {
      if (name.empty()) continue;
      auto pass = parse_pass_name(name);
      if (!pass) {
        throw InputError("unknown pass " + name +
                         " (duration-range, over-all, at-end, synth-defs, expand-defs)");
      }
      p.passes.push_back(*pass);
    }
  }
  if (o.progressive == "subject") {
    p.over_all.parameters = ProgressiveParameters::Subject;
  } else if (o.progressive == "all") {
    p.over_all.parameters = ProgressiveParameters::AllOccurring;
  } else {
    throw InputError("unknown progressive parameter rule " + o.progressive + " (subject or all)");
  }
  p.rates = in.rates;
  p.groups = in.groups;
  return p;
}

SearchBounds bounds_of(const Options& o) {
  SearchBounds b;
  auto h = parse_rational(o.horizon);
  if (!h || *h < 0) throw InputError("horizon must be a non-negative number, not " + o.horizon);
  b.horizon = *h;
  b.max_steps = o.max_steps;
  b.max_nodes = o.max_nodes;
  b.max_objects = o.max_objects;
  b.prune_duplicates = !o.no_prune;
  return b;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Collects every output first so nothing is written when a later step fails.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  std::string stdout_text;

  void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
      stdout_text += content;
    } else {
      files.emplace_back(path, content);
    }
  }
};

int cmd_parse(const Options& o, Outputs& out) {
  Inputs in = load(o);
  std::string text = print_domain(in.domain);
  if (in.problem) text += print_problem(*in.problem);
  if (!in.rates.empty()) text += print_rates(in.rates);
  if (!o.plan.empty()) text += print_plan(parse_plan(read_file(o.plan), o.plan));
  out.emit(o.output, text);
  return kSuccess;
}

int cmd_lower(const Options& o, Outputs& out, std::ostream& err) {
  Inputs in = load(o);
  Problem problem = in.problem.value_or(Problem{"none", in.domain.name, {}, {}, {}, Formula::truth()});
  PipelineResult r = run_pipeline(in.domain, problem, pipeline_input(o, in));
  out.emit(o.output, print_domain(r.domain));
  if (in.problem) out.emit(o.problem_output, print_problem(r.problem));
  bool as_json = json_format(o);
  if (!o.report.empty()) {
    out.emit(o.report, as_json ? dump(report_json(r.reports)) : report_text(r.reports));
  }
  for (const auto& rep : r.reports) {
    for (const auto& w : rep.warnings) err << "tempolower: note: " << rep.pass << ": " << w << "\n";
  }
  return kSuccess;
}

int cmd_validate(const Options& o, Outputs& out) {
  if (o.problem.empty() || o.plan.empty()) throw InputError("validate needs a domain, a problem and a plan");
  Inputs in = load(o);
  Plan plan = parse_plan(read_file(o.plan), o.plan);
  ValidationReport r = validate_plan(in.domain, *in.problem, plan, mode_of(o));
  out.emit(o.output, json_format(o) ? dump(report_json(r)) : report_text(r));
  return r.valid ? kSuccess : kNegative;
}

int exit_for(SearchOutcome outcome) {
  switch (outcome) {
    case SearchOutcome::Found: return kSuccess;
    case SearchOutcome::ProvenNone: return kNegative;
    case SearchOutcome::BoundExceeded: return kInconclusive;
  }
  return kInputError;
}

int cmd_plan(const Options& o, Outputs& out, std::ostream& err) {
  if (o.problem.empty()) throw InputError("plan needs a domain and a problem");
  Inputs in = load(o);
  Mode mode = mode_of(o);
  bool as_json = json_format(o);
  SearchResult r = plan_search(in.domain, *in.problem, mode, bounds_of(o));
  if (r.outcome == SearchOutcome::Found) {
    if (!o.output.empty() || !as_json) out.emit(o.output, print_plan(r.plan));
  }
  std::string report = as_json ? dump(report_json(r, mode)) : report_text(r, mode);
  if (!o.report.empty()) {
    out.emit(o.report, report);
  } else if (as_json && o.output.empty()) {
    out.emit("", report);
  }
  if (r.outcome != SearchOutcome::Found && !as_json) {
    err << "tempolower: note: " << outcome_name(r.outcome) << " after " << r.expanded << " nodes";
    if (!r.note.empty()) err << ": " << r.note;
    err << "\n";
  }
  return exit_for(r.outcome);
}

int cmd_equiv(const Options& o, Outputs& out) {
  if (o.problem.empty()) throw InputError("equiv needs a domain and a problem");
  Inputs in = load(o);
  PipelineResult lowered = run_pipeline(in.domain, *in.problem, pipeline_input(o, in));
  EquivalenceVerdict v = check_equivalence(in.problem->name, in.domain, *in.problem, lowered.domain,
                                           lowered.problem, lowered.reports, bounds_of(o));
  out.emit(o.output, json_format(o) ? dump(report_json(v)) : report_text(v));
  if (!v.agree) return kInconclusive;
  return *v.agree ? kSuccess : kNegative;
}

void add_inputs(CLI::App* cmd, Options& o, bool problem_required) {
  cmd->add_option("domain", o.domain, "Domain file")->required();
  auto* p = cmd->add_option("problem", o.problem, "Problem file");
  if (problem_required) p->required();
}

void add_lowering_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--rates", o.rates, "Rate annotations for duration-range actions");
  cmd->add_option("--groups", o.groups, "Definition groups for synth-defs");
  cmd->add_option("--passes", o.passes, "Comma-separated passes; run in pipeline order");
  cmd->add_option("--progressive", o.progressive, "Progressive predicate parameters: subject or all");
}

void add_bounds(CLI::App* cmd, Options& o) {
  cmd->add_option("--horizon", o.horizon, "Latest end time");
  cmd->add_option("--max-steps", o.max_steps, "Most plan steps");
  cmd->add_option("--max-nodes", o.max_nodes, "Most expanded search nodes");
  cmd->add_option("--max-objects", o.max_objects, "Most problem objects");
  cmd->add_flag("--no-prune", o.no_prune, "Disable duplicate detection (slow reference search)");
}

}  // namespace

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path + ": " + ec.message());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  bool color = false;
  auto diagnose = [&](const std::string& message) {
    err << "tempolower: " << (color ? "\033[1;31merror\033[0m" : "error") << ": " << message << "\n";
  };
  try {
    color = use_color(err);
  } catch (const InputError& e) {
    diagnose(e.what());
    return kInputError;
  }

  Options o;
  CLI::App app{"Source-to-source lowering of temporal planning constructs", "tempolower"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* parse = app.add_subcommand("parse", "Check a domain (and optional problem, rates, plan); print the normal form");
  add_inputs(parse, o, false);
  parse->add_option("--rates", o.rates, "Rate annotations");
  parse->add_option("--groups", o.groups, "Definition groups");
  parse->add_option("--plan", o.plan, "Plan file");
  parse->add_option("-o,--output", o.output, "Output file");

  auto* lower = app.add_subcommand("lower", "Apply lowering passes");
  add_inputs(lower, o, false);
  add_lowering_options(lower, o);
  lower->add_option("-o,--output", o.output, "Lowered domain file");
  lower->add_option("--problem-output", o.problem_output, "Lowered problem file");
  lower->add_option("--report", o.report, "Lowering report file");
  lower->add_option("--format", o.format, "Report format: text or json");

  auto* validate = app.add_subcommand("validate", "Validate a plan");
  add_inputs(validate, o, true);
  validate->add_option("plan", o.plan, "Plan file")->required();
  validate->add_option("--mode", o.mode, "pddl21 or lowered");
  validate->add_option("--format", o.format, "text or json");
  validate->add_option("-o,--output", o.output, "Report file");

  auto* plan = app.add_subcommand("plan", "Search for a plan within bounds");
  add_inputs(plan, o, true);
  plan->add_option("--mode", o.mode, "pddl21 or lowered");
  plan->add_option("--format", o.format, "text or json");
  plan->add_option("-o,--output", o.output, "Plan file");
  plan->add_option("--report", o.report, "Search report file");
  add_bounds(plan, o);

  auto* equiv = app.add_subcommand("equiv", "Compare solvability of a model and its lowering");
  add_inputs(equiv, o, true);
  add_lowering_options(equiv, o);
  add_bounds(equiv, o);
  equiv->add_option("--format", o.format, "text or json");
  equiv->add_option("-o,--output", o.output, "Report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    diagnose(e.what());
    err << "run 'tempolower --help' for usage\n";
    return kInputError;
  }

  Outputs outputs;
  int status = kInputError;
  try {
    if (parse->parsed()) status = cmd_parse(o, outputs);
    if (lower->parsed()) status = cmd_lower(o, outputs, err);
    if (validate->parsed()) status = cmd_validate(o, outputs);
    if (plan->parsed()) status = cmd_plan(o, outputs, err);
    if (equiv->parsed()) status = cmd_equiv(o, outputs);
    for (const auto& [path, content] : outputs.files) write_atomically(path, content);
  } catch (const ModelError& e) {
    diagnose(e.what());
    if (o.format == "json") out << dump(error_json(e.message(), e.span()));
    return kInputError;
  } catch (const std::exception& e) {
    diagnose(e.what());
    if (o.format == "json") out << dump(error_json(e.what(), {}));
    return kInputError;
  }
  out << outputs.stdout_text;
  return status;
}

}  // namespace tempolower::cli
