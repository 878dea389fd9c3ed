#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cpgql {

/// A shipped prompt text with the repository-relative file it comes from.
struct PromptFile {
  std::string name;
  std::string text;
};

/// Raw prompt data files as shipped (the structured prompt still holds its
/// schema placeholder).
std::vector<PromptFile> shipped_prompt_files();

/// System prompts as sent to the model.
std::string direct_system_prompt();
std::string structured_system_prompt();  // embeds the QuerySpec JSON schema
std::string agentic_system_prompt();

/// The published JSON schema document for QuerySpec.
std::string_view query_spec_schema_document();

}  // namespace cpgql
