#include "cpgql/ir_schema.hpp"

#include <algorithm>
#include <set>

#include "cpgql/regex_dialect.hpp"

namespace cpgql {

using json = nlohmann::json;

std::string_view to_string(QueryType t) {
  switch (t) {
    case QueryType::method_query: return "method_query";
    case QueryType::call_query: return "call_query";
    case QueryType::assignment_query: return "assignment_query";
    case QueryType::data_flow: return "data_flow";
    case QueryType::composite: return "composite";
  }
  return "?";
}

std::string_view to_string(OutputColumn c) {
  switch (c) {
    case OutputColumn::name: return "name";
    case OutputColumn::fullName: return "fullName";
    case OutputColumn::signature: return "signature";
    case OutputColumn::code: return "code";
    case OutputColumn::lineNumber: return "lineNumber";
    case OutputColumn::columnNumber: return "columnNumber";
    case OutputColumn::filename: return "filename";
    case OutputColumn::typeFullName: return "typeFullName";
    case OutputColumn::methodName: return "methodName";
    case OutputColumn::order: return "order";
  }
  return "?";
}

std::string_view to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::parameter: return "parameter";
    case EndpointKind::call: return "call";
    case EndpointKind::literal: return "literal";
  }
  return "?";
}

std::string_view to_string(Modifier m) {
  switch (m) {
    case Modifier::public_: return "public";
    case Modifier::private_: return "private";
    case Modifier::protected_: return "protected";
    case Modifier::static_: return "static";
  }
  return "?";
}

std::string_view to_string(ValidationReason r) {
  switch (r) {
    case ValidationReason::parse_error: return "parse_error";
    case ValidationReason::unknown_field: return "unknown_field";
    case ValidationReason::missing_field: return "missing_field";
    case ValidationReason::bad_enum: return "bad_enum";
    case ValidationReason::constraint_violation: return "constraint_violation";
  }
  return "?";
}

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<Enum, N>& all, std::string_view s) {
  for (Enum e : all)
    if (to_string(e) == s) return e;
  return std::nullopt;
}

}  // namespace

std::optional<QueryType> query_type_from_string(std::string_view s) { return lookup(kAllQueryTypes, s); }
std::optional<OutputColumn> output_column_from_string(std::string_view s) {
  return lookup(kAllOutputColumns, s);
}
std::optional<EndpointKind> endpoint_kind_from_string(std::string_view s) {
  return lookup(kAllEndpointKinds, s);
}
std::optional<Modifier> modifier_from_string(std::string_view s) { return lookup(kAllModifiers, s); }

bool is_flow_query(QueryType t) { return t == QueryType::data_flow || t == QueryType::composite; }

bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x20 || u == 0x7f;
  });
}

// ---------------------------------------------------------------------------
// JSON extraction

namespace {

// Scans a balanced object starting at text[start] == '{'. Returns its length.
std::optional<std::size_t> balanced_object_length(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i - start + 1;
    }
  }
  return std::nullopt;
}

std::optional<std::string> first_object(std::string_view text) {
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    if (auto len = balanced_object_length(text, pos)) return std::string(text.substr(pos, *len));
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> extract_json_object(std::string_view text) {
  constexpr std::string_view fence = "```";
  std::size_t open = text.find(fence);
  while (open != std::string_view::npos) {
    const std::size_t line_end = text.find('\n', open);
    if (line_end == std::string_view::npos) break;
    const std::size_t close = text.find(fence, line_end);
    if (close == std::string_view::npos) break;
    if (auto obj = first_object(text.substr(line_end, close - line_end))) return obj;
    open = text.find(fence, close + fence.size());
  }
  return first_object(text);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
 public:
  SpecParseResult run(const json& doc) {
    QuerySpec spec;
    if (!doc.is_object()) {
      add("", ValidationReason::parse_error, "document is not a JSON object");
      return finish(std::move(spec));
    }
    for (const auto& [key, _] : doc.items()) {
      static const std::set<std::string> known{"query_type", "filter", "source", "sink",
                                               "output_columns", "limit"};
      if (!known.contains(key)) add("/" + key, ValidationReason::unknown_field, "unknown field '" + key + "'");
    }

    std::optional<QueryType> qt;
    if (!doc.contains("query_type")) {
      add("/query_type", ValidationReason::missing_field, "query_type is required");
    } else if (const auto& v = doc["query_type"]; !v.is_string()) {
      add("/query_type", ValidationReason::constraint_violation, "query_type must be a string");
    } else if (qt = query_type_from_string(v.get<std::string>()); !qt) {
      add("/query_type", ValidationReason::bad_enum,
          "query_type '" + v.get<std::string>() +
              "' is not one of method_query, call_query, assignment_query, data_flow, composite");
    } else {
      spec.query_type = *qt;
    }

    if (doc.contains("filter")) spec.filter = filter(doc["filter"], "/filter");
    if (doc.contains("source")) spec.source = endpoint(doc["source"], "/source");
    if (doc.contains("sink")) spec.sink = endpoint(doc["sink"], "/sink");
    columns(doc, spec);
    if (doc.contains("limit")) {
      const auto& v = doc["limit"];
      if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
        add("/limit", ValidationReason::constraint_violation, "limit must be a positive integer");
      } else {
        spec.limit = v.get<std::int64_t>();
      }
    }

    if (qt) shape(*qt, doc);
    return finish(std::move(spec));
  }

 private:
  void add(std::string path, ValidationReason reason, std::string message) {
    errors_.push_back({std::move(path), reason, std::move(message)});
  }

  SpecParseResult finish(QuerySpec spec) {
    SpecParseResult result;
    if (errors_.empty()) {
      result.spec = std::move(spec);
    } else {
      result.errors = std::move(errors_);
    }
    return result;
  }

  std::optional<std::string> string_field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj[key];
    if (!v.is_string()) {
      add(path + "/" + key, ValidationReason::constraint_violation, key + " must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<std::string> regex_field(const json& obj, const std::string& key, const std::string& path) {
    auto s = string_field(obj, key, path);
    if (!s) return std::nullopt;
    if (auto problem = check_regex_dialect(*s)) {
      add(path + "/" + key, ValidationReason::constraint_violation, key + " is not a supported regex: " + *problem);
      return std::nullopt;
    }
    return s;
  }

  std::optional<std::string> identifier_field(const json& obj, const std::string& key, const std::string& path) {
    auto s = string_field(obj, key, path);
    if (!s) return std::nullopt;
    if (!is_valid_identifier(*s)) {
      add(path + "/" + key, ValidationReason::constraint_violation,
          key + " must be non-empty and contain no control characters");
      return std::nullopt;
    }
    return s;
  }

  std::optional<StructuralFilter> filter(const json& v, const std::string& path) {
    if (!v.is_object()) {
      add(path, ValidationReason::constraint_violation, "filter must be an object");
      return std::nullopt;
    }
    static const std::set<std::string> known{"method_name", "type_name", "modifier", "annotation",
                                             "target_identifier"};
    for (const auto& [key, _] : v.items())
      if (!known.contains(key)) add(path + "/" + key, ValidationReason::unknown_field, "unknown field '" + key + "'");

    StructuralFilter f;
    f.method_name = regex_field(v, "method_name", path);
    f.type_name = regex_field(v, "type_name", path);
    if (auto m = string_field(v, "modifier", path)) {
      f.modifier = modifier_from_string(*m);
      if (!f.modifier)
        add(path + "/modifier", ValidationReason::bad_enum,
            "modifier '" + *m + "' is not one of public, private, protected, static");
    }
    f.annotation = identifier_field(v, "annotation", path);
    f.target_identifier = identifier_field(v, "target_identifier", path);
    if (v.empty()) add(path, ValidationReason::constraint_violation, "filter must set at least one field");
    return f;
  }

  std::optional<FlowEndpoint> endpoint(const json& v, const std::string& path) {
    if (!v.is_object()) {
      add(path, ValidationReason::constraint_violation, "endpoint must be an object");
      return std::nullopt;
    }
    static const std::set<std::string> known{"kind", "method", "name", "value"};
    for (const auto& [key, _] : v.items())
      if (!known.contains(key)) add(path + "/" + key, ValidationReason::unknown_field, "unknown field '" + key + "'");

    FlowEndpoint ep;
    std::optional<EndpointKind> kind;
    if (!v.contains("kind")) {
      add(path + "/kind", ValidationReason::missing_field, "kind is required");
    } else if (auto k = string_field(v, "kind", path)) {
      kind = endpoint_kind_from_string(*k);
      if (!kind) add(path + "/kind", ValidationReason::bad_enum, "kind '" + *k + "' is not one of parameter, call, literal");
    }
    ep.method = identifier_field(v, "method", path);
    ep.name = identifier_field(v, "name", path);
    ep.value = identifier_field(v, "value", path);
    if (!kind) return ep;
    ep.kind = *kind;

    const char* required = *kind == EndpointKind::parameter ? "method" : *kind == EndpointKind::call ? "name" : "value";
    for (const char* field : {"method", "name", "value"}) {
      const bool present = v.contains(field);
      if (std::string_view(field) == required) {
        if (!present)
          add(path + "/" + field, ValidationReason::missing_field,
              std::string(field) + " is required for kind " + std::string(to_string(*kind)));
      } else if (present) {
        add(path + "/" + field, ValidationReason::constraint_violation,
            std::string(field) + " is not allowed for kind " + std::string(to_string(*kind)));
      }
    }
    return ep;
  }

  void columns(const json& doc, QuerySpec& spec) {
    if (!doc.contains("output_columns")) {
      add("/output_columns", ValidationReason::missing_field, "output_columns is required");
      return;
    }
    const auto& v = doc["output_columns"];
    if (!v.is_array()) {
      add("/output_columns", ValidationReason::constraint_violation, "output_columns must be an array");
      return;
    }
    if (v.empty()) add("/output_columns", ValidationReason::constraint_violation, "output_columns must not be empty");
    if (v.size() > kAllOutputColumns.size())
      add("/output_columns", ValidationReason::constraint_violation, "output_columns has more than 10 entries");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string item_path = "/output_columns/" + std::to_string(i);
      if (!v[i].is_string()) {
        add(item_path, ValidationReason::constraint_violation, "column must be a string");
        continue;
      }
      const auto name = v[i].get<std::string>();
      auto col = output_column_from_string(name);
      if (!col) {
        add(item_path, ValidationReason::bad_enum, "unknown output column '" + name + "'");
        continue;
      }
      if (std::find(spec.output_columns.begin(), spec.output_columns.end(), *col) != spec.output_columns.end()) {
        add(item_path, ValidationReason::constraint_violation, "duplicate output column '" + name + "'");
        continue;
      }
      spec.output_columns.push_back(*col);
    }
  }

  void shape(QueryType qt, const json& doc) {
    const std::string type_name(to_string(qt));
    if (is_flow_query(qt)) {
      for (const char* end : {"source", "sink"})
        if (!doc.contains(end))
          add(std::string("/") + end, ValidationReason::missing_field, std::string(end) + " is required for " + type_name);
    } else {
      for (const char* end : {"source", "sink"})
        if (doc.contains(end))
          add(std::string("/") + end, ValidationReason::constraint_violation,
              std::string(end) + " is not allowed for " + type_name);
    }
    if (qt == QueryType::data_flow) {
      if (doc.contains("filter"))
        add("/filter", ValidationReason::constraint_violation,
            "filter is not allowed for data_flow; use composite for filtered flows");
    } else if (!doc.contains("filter")) {
      add("/filter", ValidationReason::missing_field, "filter is required for " + type_name);
    }
  }

  std::vector<ValidationError> errors_;
};

}  // namespace

SpecParseResult validate_spec(const json& doc) { return Validator{}.run(doc); }

SpecParseResult parse_spec(std::string_view document) {
  auto text = extract_json_object(document);
  if (!text) {
    SpecParseResult r;
    r.errors.push_back({"", ValidationReason::parse_error, "no JSON object found in the response"});
    return r;
  }
  json doc = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    SpecParseResult r;
    r.errors.push_back({"", ValidationReason::parse_error, "response contains malformed JSON"});
    return r;
  }
  return validate_spec(doc);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json to_json(const FlowEndpoint& ep) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(ep.kind);
  if (ep.method) j["method"] = *ep.method;
  if (ep.name) j["name"] = *ep.name;
  if (ep.value) j["value"] = *ep.value;
  return j;
}

nlohmann::ordered_json to_json(const StructuralFilter& f) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (f.method_name) j["method_name"] = *f.method_name;
  if (f.type_name) j["type_name"] = *f.type_name;
  if (f.modifier) j["modifier"] = to_string(*f.modifier);
  if (f.annotation) j["annotation"] = *f.annotation;
  if (f.target_identifier) j["target_identifier"] = *f.target_identifier;
  return j;
}

nlohmann::ordered_json to_json(const QuerySpec& spec) {
  nlohmann::ordered_json j;
  j["query_type"] = to_string(spec.query_type);
  if (spec.filter) j["filter"] = to_json(*spec.filter);
  if (spec.source) j["source"] = to_json(*spec.source);
  if (spec.sink) j["sink"] = to_json(*spec.sink);
  auto cols = nlohmann::ordered_json::array();
  for (auto c : spec.output_columns) cols.push_back(to_string(c));
  j["output_columns"] = std::move(cols);
  if (spec.limit) j["limit"] = *spec.limit;
  return j;
}

std::string spec_fingerprint(const QuerySpec& spec) { return to_json(spec).dump(); }

std::string format_errors(const std::vector<ValidationError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    out += "- ";
    out += e.path.empty() ? std::string("(document)") : e.path;
    out += " [";
    out += to_string(e.reason);
    out += "] ";
    out += e.message;
    out += '\n';
  }
  return out;
}

}  // namespace cpgql
