#include "cpgql/tools.hpp"

#include <set>

#include "cpgql/mapper.hpp"

namespace cpgql {

using json = nlohmann::json;

namespace {

json endpoint_schema() {
  return json::parse(R"({
    "type": "object",
    "properties": {
      "kind": {"enum": ["parameter", "call", "literal"]},
      "method": {"type": "string"},
      "name": {"type": "string"},
      "value": {"type": "string"}
    },
    "required": ["kind"]
  })");
}

json columns_schema() {
  return json::parse(R"({"type": "array", "items": {"enum": ["name", "fullName", "signature", "code",
      "lineNumber", "columnNumber", "filename", "typeFullName", "methodName", "order"]}})");
}

ToolSchema make_schema(std::string name, std::string description, json properties, json required) {
  json params{{"type", "object"}, {"properties", std::move(properties)}, {"required", std::move(required)}};
  return {std::move(name), std::move(description), std::move(params)};
}

ToolPlan fail(std::string message) {
  ToolPlan p;
  p.error = std::move(message);
  return p;
}

std::optional<std::string> unknown_keys(const json& args, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : args.items())
    if (!allowed.contains(key)) return "bad arguments: unknown argument '" + key + "'";
  return std::nullopt;
}

ToolPlan compile_plan(const json& spec_doc, FlowProjection projection) {
  auto parsed = validate_spec(spec_doc);
  if (!parsed.ok()) return fail("bad arguments:\n" + format_errors(parsed.errors));
  ToolPlan p;
  p.query = compile(*parsed.spec, projection).text;
  p.spec = std::move(parsed.spec);
  return p;
}

void copy_if_present(const json& from, const char* from_key, json& to, const char* to_key) {
  if (from.contains(from_key)) to[to_key] = from[from_key];
}

ToolPlan plan_structural(const json& args, QueryType qt) {
  const bool methods = qt == QueryType::method_query;
  const std::set<std::string> allowed = methods
      ? std::set<std::string>{"name", "type_name", "modifier", "annotation", "output_columns", "limit"}
      : std::set<std::string>{"name", "type_name", "argument", "output_columns", "limit"};
  if (auto err = unknown_keys(args, allowed)) return fail(*err);

  json filter = json::object();
  copy_if_present(args, "name", filter, "method_name");
  copy_if_present(args, "type_name", filter, "type_name");
  if (methods) {
    copy_if_present(args, "modifier", filter, "modifier");
    copy_if_present(args, "annotation", filter, "annotation");
  } else {
    copy_if_present(args, "argument", filter, "target_identifier");
  }
  if (filter.empty()) filter["method_name"] = ".*";

  json spec{{"query_type", std::string(to_string(qt))}, {"filter", std::move(filter)}};
  spec["output_columns"] = args.contains("output_columns") ? args["output_columns"]
                                                           : json::array({methods ? "name" : "code"});
  copy_if_present(args, "limit", spec, "limit");
  return compile_plan(spec, FlowProjection::paths);
}

ToolPlan plan_flow(const json& args, FlowProjection projection) {
  const std::set<std::string> allowed = projection == FlowProjection::paths
                                            ? std::set<std::string>{"source", "sink", "limit"}
                                            : std::set<std::string>{"source", "sink", "output_columns", "limit"};
  if (auto err = unknown_keys(args, allowed)) return fail(*err);
  json spec{{"query_type", "data_flow"}};
  copy_if_present(args, "source", spec, "source");
  copy_if_present(args, "sink", spec, "sink");
  spec["output_columns"] = args.contains("output_columns") ? args["output_columns"] : json::array({"code"});
  copy_if_present(args, "limit", spec, "limit");
  return compile_plan(spec, projection);
}

}  // namespace

const std::vector<ToolSchema>& agent_tool_schemas() {
  static const std::vector<ToolSchema> schemas = [] {
    std::vector<ToolSchema> s;
    s.push_back(make_schema(
        "find_methods", "List method declarations matching a name regex, declaring-type regex, modifier or annotation.",
        {{"name", {{"type", "string"}, {"description", "regex over the method name"}}},
         {"type_name", {{"type", "string"}, {"description", "regex over the declaring type's full name"}}},
         {"modifier", {{"enum", {"public", "private", "protected", "static"}}}},
         {"annotation", {{"type", "string"}, {"description", "annotation name without '@'"}}},
         {"output_columns", columns_schema()},
         {"limit", {{"type", "integer"}, {"minimum", 1}}}},
        json::array()));
    s.push_back(make_schema(
        "find_calls", "List call sites matching a called-method regex, the caller's declaring type, or an argument identifier.",
        {{"name", {{"type", "string"}, {"description", "regex over the called method name"}}},
         {"type_name", {{"type", "string"}, {"description", "regex over the caller's declaring type"}}},
         {"argument", {{"type", "string"}, {"description", "identifier passed as an argument"}}},
         {"output_columns", columns_schema()},
         {"limit", {{"type", "integer"}, {"minimum", 1}}}},
        json::array()));
    s.push_back(make_schema("trace_data_flow", "Print the data-flow paths from a source endpoint to a sink endpoint.",
                            {{"source", endpoint_schema()},
                             {"sink", endpoint_schema()},
                             {"limit", {{"type", "integer"}, {"minimum", 1}}}},
                            json::array({"source", "sink"})));
    s.push_back(make_schema("find_reachable_by", "List the source nodes from which data reaches the sink endpoint.",
                            {{"source", endpoint_schema()},
                             {"sink", endpoint_schema()},
                             {"output_columns", columns_schema()},
                             {"limit", {{"type", "integer"}, {"minimum", 1}}}},
                            json::array({"source", "sink"})));
    s.push_back(make_schema("run_custom_query", "Run an arbitrary CPGQL query and return its output.",
                            {{"query", {{"type", "string"}, {"description", "CPGQL query text"}}}},
                            json::array({"query"})));
    return s;
  }();
  return schemas;
}

ToolPlan plan_tool_call(const ToolCall& call) {
  json args = json::parse(call.arguments, nullptr, false);
  if (args.is_discarded() || !args.is_object()) return fail("bad arguments: arguments are not a JSON object");

  if (call.tool_name == "find_methods") return plan_structural(args, QueryType::method_query);
  if (call.tool_name == "find_calls") return plan_structural(args, QueryType::call_query);
  if (call.tool_name == "trace_data_flow") return plan_flow(args, FlowProjection::paths);
  if (call.tool_name == "find_reachable_by") return plan_flow(args, FlowProjection::reachable);
  if (call.tool_name == "run_custom_query") {
    if (auto err = unknown_keys(args, {"query"})) return fail(*err);
    if (!args.contains("query") || !args["query"].is_string() || args["query"].get<std::string>().empty())
      return fail("bad arguments: query must be a non-empty string");
    ToolPlan p;
    p.query = args["query"].get<std::string>();
    return p;
  }
  return fail("unknown tool '" + call.tool_name + "'");
}

std::string tool_dispatch(const ToolCall& call, const JoernClient& joern) {
  const ToolPlan plan = plan_tool_call(call);
  if (plan.error) return "error: " + *plan.error;
  const ExecutionResult r = joern.execute(*plan.query);
  if (!r.ok) return "error: " + r.error_message.value_or("query failed");
  return r.normalized_output;
}

}  // namespace cpgql
