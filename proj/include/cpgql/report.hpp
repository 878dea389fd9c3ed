#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cpgql/metrics.hpp"

namespace cpgql {

enum class ReportFormat { markdown, csv, json };

std::string_view to_string(ReportFormat f);
std::optional<ReportFormat> report_format_from_string(std::string_view s);

/// Deterministic rendering of an aggregate report.
///   markdown: overall Res./Exec. table per approach, secondary metrics,
///             per-tier result match, per-task tallies and coverage relations.
///   csv:      one header row plus one row per model x approach cell.
///   json:     the full report.
std::string emit_report(const AggregateReport& report, ReportFormat format);

nlohmann::ordered_json to_json(const AggregateReport& report);

}  // namespace cpgql
