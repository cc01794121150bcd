#include "tempolower/report.hpp"

#include <sstream>

#include "tempolower/printer.hpp"

namespace tempolower {

using nlohmann::json;

namespace {

json envelope(const std::string& kind, const std::string& verdict) {
  return json{{"schema", kReportSchema}, {"kind", kind}, {"verdict", verdict}};
}

void put_time(json& j, const Rational& t, const std::string& key = "time") {
  j[key] = t.convert_to<double>();
  j[key + "_exact"] = format_rational(t);
}

json violation_json(const Violation& v) {
  json j{{"kind", v.kind}, {"culprit", v.culprit}, {"detail", v.detail}};
  put_time(j, v.time);
  return j;
}

json plan_json(const Plan& plan) {
  json steps = json::array();
  for (const auto& s : plan) {
    json j{{"action", s.label()}};
    put_time(j, s.time);
    if (s.duration) {
      j["duration"] = s.duration->convert_to<double>();
      j["duration_exact"] = format_rational(*s.duration);
    }
    steps.push_back(j);
  }
  return steps;
}

json validation_body(const ValidationReport& r) {
  json j = envelope("validation", verdict_name(r));
  j["mode"] = mode_name(r.mode);
  j["violation"] = r.violation ? violation_json(*r.violation) : json(nullptr);
  j["goal_holds"] = r.goal_holds;
  put_time(j, r.makespan, "makespan");
  json trace = json::array();
  for (const auto& t : r.trace) {
    json e{{"action", t.action}, {"digest", t.digest}};
    put_time(e, t.time);
    trace.push_back(e);
  }
  j["trace"] = trace;
  return j;
}

json search_body(const SearchResult& r) {
  return json{{"outcome", outcome_name(r.outcome)},
              {"solvable", r.outcome == SearchOutcome::Found},
              {"plan", r.outcome == SearchOutcome::Found ? plan_json(r.plan) : json(nullptr)},
              {"expanded", r.expanded},
              {"note", r.note}};
}

std::string violation_text(const Violation& v) {
  std::string out = v.kind + " violation at t=" + format_rational(v.time) + ": " + v.culprit;
  if (!v.detail.empty()) out += "\n  " + v.detail;
  return out;
}

}  // namespace

const char* verdict_name(const ValidationReport& r) { return r.valid ? "valid" : "invalid"; }

const char* verdict_name(const EquivalenceVerdict& v) {
  if (!v.agree) return "inconclusive";
  return *v.agree ? "agree" : "disagree";
}

json report_json(const ValidationReport& r) { return validation_body(r); }

json report_json(const std::vector<LoweringReport>& reports) {
  json j = envelope("lowering", "lowered");
  json passes = json::array();
  for (const auto& r : reports) {
    json p{{"pass", r.pass},
           {"synthesized", r.synthesized},
           {"modified_actions", r.modified_actions},
           {"goal_augmentations", r.goal_augmentations},
           {"warnings", r.warnings}};
    json added = json::array();
    for (const auto& [action, formula] : r.added_preconditions) added.push_back({{"action", action}, {"formula", formula}});
    p["added_preconditions"] = added;
    json names = json::array();
    for (const auto& [name, meaning] : r.name_notes) names.push_back({{"name", name}, {"meaning", meaning}});
    p["names"] = names;
    json ranges = json::array();
    for (const auto& m : r.range_mappings) {
      ranges.push_back({{"original", m.original},
                        {"start", m.start},
                        {"stop", m.stop},
                        {"timestamp_parameters", m.timestamp_parameters}});
    }
    p["range_mappings"] = ranges;
    passes.push_back(p);
  }
  j["passes"] = passes;
  return j;
}

json report_json(const SearchResult& r, Mode mode) {
  json j = envelope("plan", outcome_name(r.outcome));
  j["mode"] = mode_name(mode);
  j.update(search_body(r));
  return j;
}

json report_json(const EquivalenceVerdict& v) {
  json j = envelope("equivalence", verdict_name(v));
  j["instance"] = v.instance;
  j["original"] = search_body(v.original);
  j["lowered"] = search_body(v.lowered);
  j["original_solvable"] = v.original_solvable();
  j["lowered_solvable"] = v.lowered_solvable();
  j["agree"] = v.agree ? json(*v.agree) : json(nullptr);
  if (v.original_solvable()) {
    j["witness"] = plan_json(v.original.plan);
  } else if (v.lowered_solvable()) {
    j["witness"] = plan_json(v.lowered.plan);
  } else {
    j["witness"] = v.original.note;
  }
  j["mapped_plan"] = v.mapped_plan ? plan_json(*v.mapped_plan) : json(nullptr);
  j["mapped_validation"] = v.mapped_report ? validation_body(*v.mapped_report) : json(nullptr);
  j["notes"] = v.notes;
  return j;
}

json error_json(const std::string& message, const SourceSpan& span) {
  json j = envelope("error", "error");
  j["message"] = message;
  if (span.line > 0) j["location"] = {{"file", span.file}, {"line", span.line}, {"column", span.column}};
  return j;
}

std::string report_text(const ValidationReport& r) {
  std::ostringstream os;
  os << "mode: " << mode_name(r.mode) << "\n";
  for (const auto& t : r.trace) os << format_rational(t.time) << ": " << t.action << "  state " << t.digest << "\n";
  if (r.violation) os << violation_text(*r.violation) << "\n";
  os << "goal: " << (r.goal_holds ? "holds" : "does not hold") << "\n";
  os << "verdict: " << verdict_name(r) << "\n";
  return os.str();
}

std::string report_text(const std::vector<LoweringReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    os << "pass " << r.pass << "\n";
    for (const auto& [name, meaning] : r.name_notes) os << "  new " << name << ": " << meaning << "\n";
    for (const auto& s : r.synthesized) {
      bool described = std::any_of(r.name_notes.begin(), r.name_notes.end(),
                                   [&](const auto& n) { return n.first == s; });
      if (!described) os << "  new " << s << "\n";
    }
    for (const auto& a : r.modified_actions) os << "  modified " << a << "\n";
    for (const auto& [action, formula] : r.added_preconditions) {
      os << "  precondition of " << action << ": " << formula << "\n";
    }
    for (const auto& g : r.goal_augmentations) os << "  goal conjunct: " << g << "\n";
    for (const auto& m : r.range_mappings) {
      os << "  " << m.original << " -> " << m.start << " + " << m.stop << "\n";
    }
    for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
  }
  return os.str();
}

std::string report_text(const SearchResult& r, Mode mode) {
  std::ostringstream os;
  os << "mode: " << mode_name(mode) << "\n";
  os << "outcome: " << outcome_name(r.outcome) << " (" << r.expanded << " nodes)\n";
  if (!r.note.empty()) os << r.note << "\n";
  if (r.outcome == SearchOutcome::Found) os << print_plan(r.plan);
  return os.str();
}

std::string report_text(const EquivalenceVerdict& v) {
  std::ostringstream os;
  os << "instance: " << v.instance << "\n";
  os << "original (pddl21): " << outcome_name(v.original.outcome) << "\n";
  if (v.original_solvable()) os << print_plan(v.original.plan);
  os << "lowered: " << outcome_name(v.lowered.outcome) << "\n";
  if (v.lowered_solvable()) os << print_plan(v.lowered.plan);
  if (v.mapped_plan) os << "mapped plan:\n" << print_plan(*v.mapped_plan);
  for (const auto& n : v.notes) os << "note: " << n << "\n";
  os << "verdict: " << verdict_name(v) << "\n";
  return os.str();
}

}  // namespace tempolower
