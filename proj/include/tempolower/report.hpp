#pragma once

// Structured and plain-text renderings of every report. All structured
// reports share one envelope:
//
//   { "schema": "tempolower-report/1", "kind": ..., "verdict": ..., ... }
//
// Times appear twice: "time" as a JSON number and "time_exact" as the exact
// rational text ("7/3").

#include <string>
#include <vector>

#include <json.hpp>

#include "tempolower/lowering.hpp"
#include "tempolower/search.hpp"
#include "tempolower/semantics.hpp"

namespace tempolower {

inline constexpr const char* kReportSchema = "tempolower-report/1";

nlohmann::json report_json(const ValidationReport& r);
nlohmann::json report_json(const std::vector<LoweringReport>& reports);
nlohmann::json report_json(const SearchResult& r, Mode mode);
nlohmann::json report_json(const EquivalenceVerdict& v);
/// Envelope for input errors: kind "error", verdict "error".
nlohmann::json error_json(const std::string& message, const SourceSpan& span);

std::string report_text(const ValidationReport& r);
std::string report_text(const std::vector<LoweringReport>& reports);
std::string report_text(const SearchResult& r, Mode mode);
std::string report_text(const EquivalenceVerdict& v);

const char* verdict_name(const ValidationReport& r);
const char* verdict_name(const EquivalenceVerdict& v);

}  // namespace tempolower
