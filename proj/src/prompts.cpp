#include "cpgql/prompts.hpp"

#include "embedded_data.hpp"

namespace cpgql {

std::vector<PromptFile> shipped_prompt_files() {
  return {
      {"data/prompts/a1_direct_system.md", std::string(embedded::prompt_direct())},
      {"data/prompts/a2_structured_system.md", std::string(embedded::prompt_structured())},
      {"data/prompts/a3_agentic_system.md", std::string(embedded::prompt_agentic())},
      {"data/schema/query_spec.schema.json", std::string(embedded::query_spec_schema())},
  };
}

std::string direct_system_prompt() { return std::string(embedded::prompt_direct()); }

std::string structured_system_prompt() {
  std::string text(embedded::prompt_structured());
  constexpr std::string_view marker = "{{SCHEMA}}";
  if (auto pos = text.find(marker); pos != std::string::npos) text.replace(pos, marker.size(), query_spec_schema_document());
  return text;
}

std::string agentic_system_prompt() { return std::string(embedded::prompt_agentic()); }

std::string_view query_spec_schema_document() { return embedded::query_spec_schema(); }

}  // namespace cpgql
