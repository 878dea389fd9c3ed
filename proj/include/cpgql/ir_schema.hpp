#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpgql {

/// Kind of analysis a QuerySpec describes. Schema v1 enumerates five.
enum class QueryType { method_query, call_query, assignment_query, data_flow, composite };

/// Node properties a structural query may project. Schema v1 enumerates ten.
enum class OutputColumn {
  name,
  fullName,
  signature,
  code,
  lineNumber,
  columnNumber,
  filename,
  typeFullName,
  methodName,
  order,
};

enum class EndpointKind { parameter, call, literal };

enum class Modifier { public_, private_, protected_, static_ };

inline constexpr std::array kAllQueryTypes{QueryType::method_query, QueryType::call_query,
                                           QueryType::assignment_query, QueryType::data_flow,
                                           QueryType::composite};

inline constexpr std::array kAllOutputColumns{
    OutputColumn::name,         OutputColumn::fullName, OutputColumn::signature,
    OutputColumn::code,         OutputColumn::lineNumber, OutputColumn::columnNumber,
    OutputColumn::filename,     OutputColumn::typeFullName, OutputColumn::methodName,
    OutputColumn::order};

inline constexpr std::array kAllEndpointKinds{EndpointKind::parameter, EndpointKind::call,
                                              EndpointKind::literal};

inline constexpr std::array kAllModifiers{Modifier::public_, Modifier::private_,
                                          Modifier::protected_, Modifier::static_};

std::string_view to_string(QueryType t);
std::string_view to_string(OutputColumn c);
std::string_view to_string(EndpointKind k);
std::string_view to_string(Modifier m);

std::optional<QueryType> query_type_from_string(std::string_view s);
std::optional<OutputColumn> output_column_from_string(std::string_view s);
std::optional<EndpointKind> endpoint_kind_from_string(std::string_view s);
std::optional<Modifier> modifier_from_string(std::string_view s);

/// True for data_flow and composite.
bool is_flow_query(QueryType t);

/// One end of a data-flow query. Which of method/name/value is set depends on kind:
/// parameter -> method, call -> name, literal -> value. The others stay empty.
struct FlowEndpoint {
  EndpointKind kind = EndpointKind::call;
  std::optional<std::string> method;
  std::optional<std::string> name;
  std::optional<std::string> value;

  bool operator==(const FlowEndpoint&) const = default;
};

/// Structural constraints. method_name and type_name are regexes in the restricted
/// dialect (see regex_dialect.hpp); annotation and target_identifier are literal names.
struct StructuralFilter {
  std::optional<std::string> method_name;
  std::optional<std::string> type_name;
  std::optional<Modifier> modifier;
  std::optional<std::string> annotation;
  std::optional<std::string> target_identifier;

  bool empty() const {
    return !method_name && !type_name && !modifier && !annotation && !target_identifier;
  }
  bool operator==(const StructuralFilter&) const = default;
};

/// The typed intermediate representation of one analysis request.
struct QuerySpec {
  QueryType query_type = QueryType::method_query;
  std::optional<StructuralFilter> filter;
  std::optional<FlowEndpoint> source;
  std::optional<FlowEndpoint> sink;
  std::vector<OutputColumn> output_columns;
  std::optional<std::int64_t> limit;

  bool operator==(const QuerySpec&) const = default;
};

enum class ValidationReason { parse_error, unknown_field, missing_field, bad_enum, constraint_violation };

std::string_view to_string(ValidationReason r);

struct ValidationError {
  std::string path;  // JSON pointer; empty only for parse_error
  ValidationReason reason = ValidationReason::parse_error;
  std::string message;

  bool operator==(const ValidationError&) const = default;
};

/// Either a valid spec or every violation found in the document.
struct SpecParseResult {
  std::optional<QuerySpec> spec;
  std::vector<ValidationError> errors;

  bool ok() const { return spec.has_value(); }
};

/// Returns the first top-level JSON object embedded in free text. A fenced
/// code block is preferred when one contains an object. Strings and escapes
/// inside the object are respected when balancing braces.
std::optional<std::string> extract_json_object(std::string_view text);

/// Extracts, parses and validates a QuerySpec from arbitrary text (LLM output,
/// file contents). Never throws; all failures come back as errors.
SpecParseResult parse_spec(std::string_view document);

/// Validates an already-parsed JSON value.
SpecParseResult validate_spec(const nlohmann::json& doc);

/// Canonical JSON form: fixed field order, absent optionals omitted.
nlohmann::ordered_json to_json(const QuerySpec& spec);
nlohmann::ordered_json to_json(const FlowEndpoint& endpoint);
nlohmann::ordered_json to_json(const StructuralFilter& filter);

/// Compact rendering of to_json(spec). Byte-equal iff specs are equal.
std::string spec_fingerprint(const QuerySpec& spec);

/// Human-readable multi-line list, suitable for feeding back to a model.
std::string format_errors(const std::vector<ValidationError>& errors);

/// Identifiers (annotation names, endpoint names, literal values) must be
/// non-empty and free of control characters.
bool is_valid_identifier(std::string_view s);

}  // namespace cpgql
