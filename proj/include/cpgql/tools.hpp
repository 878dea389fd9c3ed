#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpgql/ir_schema.hpp"
#include "cpgql/joern_client.hpp"
#include "cpgql/llm_client.hpp"

namespace cpgql {

/// The five agent tools, in registry order: find_methods, find_calls,
/// trace_data_flow, find_reachable_by, run_custom_query.
const std::vector<ToolSchema>& agent_tool_schemas();

/// What a tool call resolves to before execution: a CPGQL query, or the error
/// text handed back to the agent.
struct ToolPlan {
  std::optional<std::string> query;
  std::optional<QuerySpec> spec;  // absent for run_custom_query
  std::optional<std::string> error;
};

/// Maps a call's arguments onto a QuerySpec and compiles it (or passes a custom
/// query through). Unknown tools and bad arguments come back as error text.
ToolPlan plan_tool_call(const ToolCall& call);

/// Runs the call and returns the observation: normalized Joern output, or a
/// line starting with "error:". Tool failures never end the trial.
std::string tool_dispatch(const ToolCall& call, const JoernClient& joern);

}  // namespace cpgql
