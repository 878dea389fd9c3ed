#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cpgql/ir_schema.hpp"

namespace cpgql {

/// Raised when the mapper reaches a state a valid spec can never produce
/// (an unfilled template placeholder, a missing template). Always a bug.
class MapperDefect : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown by escape_identifier for input that cannot be embedded safely.
class IdentifierError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CpgqlQuery {
  std::string text;
  std::string spec_fingerprint;

  bool operator==(const CpgqlQuery&) const = default;
};

/// A traversal skeleton with `{{name}}` placeholders.
struct QueryTemplate {
  std::string name;  // e.g. "data_flow" or "data_flow.reachable"
  QueryType query_type = QueryType::method_query;
  std::string skeleton;
  std::set<std::string> required_placeholders;
};

/// Placeholders found in a skeleton, in sorted order.
std::set<std::string> placeholders_in(std::string_view skeleton);

/// Parses the sectioned template file format (`[name]` headers, `#` comments).
/// Throws MapperDefect when a skeleton's placeholders differ from the set the
/// mapper fills for that template.
std::map<std::string, QueryTemplate> parse_templates(std::string_view file_text);

/// The shipped template set (compiled into the library from data/templates).
const std::map<std::string, QueryTemplate>& builtin_templates();

/// How flow queries project their result.
enum class FlowProjection {
  paths,      // reachableByFlows(...).p
  reachable,  // reachableBy(...) projected onto output_columns
};

/// Compiles a valid spec to its single canonical CPGQL string.
/// Precondition: spec passed validation. Throws MapperDefect only on internal bugs.
CpgqlQuery compile(const QuerySpec& spec, FlowProjection projection = FlowProjection::paths);

/// Regex-quotes a literal name so a CPGQL name matcher accepts exactly that name.
/// Double quotes are escaped too. Throws IdentifierError on control characters.
std::string escape_identifier(std::string_view raw);

/// Renders text as a double-quoted Scala string literal.
std::string scala_string_literal(std::string_view text);

}  // namespace cpgql
