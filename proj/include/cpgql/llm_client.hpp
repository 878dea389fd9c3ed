#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpgql {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

struct ToolCall {
  std::string id;
  std::string tool_name;
  std::string arguments;  // JSON object text, as emitted by the model

  bool operator==(const ToolCall&) const = default;
};

struct CompletionUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  std::int64_t total() const { return input_tokens + output_tokens; }
  CompletionUsage& operator+=(const CompletionUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  bool operator==(const CompletionUsage&) const = default;
};

/// Componentwise sum.
CompletionUsage count_usage(std::span<const CompletionUsage> usages);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  std::vector<ToolCall> tool_calls;     // assistant only
  std::optional<std::string> tool_call_id;  // tool only
  std::optional<CompletionUsage> usage;     // assistant turns: tokens billed for producing it

  static ChatMessage system(std::string content);
  static ChatMessage user(std::string content);
  static ChatMessage assistant(std::string content, std::vector<ToolCall> calls = {});
  static ChatMessage tool(std::string call_id, std::string content);

  /// Empty when the role-dependent invariants hold.
  std::optional<std::string> check() const;

  bool operator==(const ChatMessage&) const = default;
};

struct ToolSchema {
  std::string name;
  std::string description;
  nlohmann::json parameters;  // JSON-schema object
};

enum class LlmBackend { http, replay };

struct LlmConfig {
  std::string model_id;
  double temperature = 0.0;
  std::int64_t seed = 42;
  LlmBackend backend = LlmBackend::replay;
  std::optional<std::string> endpoint;     // full chat-completions URL for http
  std::optional<std::string> replay_path;
  std::optional<std::string> trial_id;     // replay key for the conversation
  std::chrono::milliseconds timeout{120'000};
  std::chrono::milliseconds backoff_base{1'000};  // rate-limit backoff; doubled per retry

  std::optional<std::string> check() const;
};

enum class LlmErrorKind { transport_error, rate_limited, replay_exhausted, malformed_tool_call };

std::string_view to_string(LlmErrorKind k);

class LlmError : public std::runtime_error {
 public:
  LlmError(LlmErrorKind kind, const std::string& what, std::optional<CompletionUsage> usage = std::nullopt,
           std::string raw_content = {})
      : std::runtime_error(what), kind_(kind), usage_(usage), raw_content_(std::move(raw_content)) {}

  LlmErrorKind kind() const { return kind_; }
  /// Tokens billed for the failed call, when the backend reported them.
  const std::optional<CompletionUsage>& usage() const { return usage_; }
  /// The assistant text that could not be interpreted, for malformed_tool_call.
  const std::string& raw_content() const { return raw_content_; }

 private:
  LlmErrorKind kind_;
  std::optional<CompletionUsage> usage_;
  std::string raw_content_;
};

struct Completion {
  ChatMessage message;
  CompletionUsage usage;
};

/// Scripted assistant turns keyed by trial id. File format:
///   {"format": "cpgql-replay/1",
///    "trials": {"<trial-id>": [{"assistant_message": {"content": "...",
///                                 "tool_calls": [{"id", "name", "arguments"}]},
///                               "usage": {"input_tokens": N, "output_tokens": M}}]}}
class ReplayScript {
 public:
  struct Turn {
    ChatMessage message;
    CompletionUsage usage;
  };

  static ReplayScript load(const std::string& path);  // throws std::runtime_error
  static ReplayScript from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;

  void add_turn(const std::string& trial_id, Turn turn);
  const std::vector<Turn>* turns(const std::string& trial_id) const;
  std::size_t trial_count() const { return trials_.size(); }

 private:
  std::map<std::string, std::vector<Turn>> trials_;
};

/// Replay trial keys: "<approach>/<model>/<task>/<seed>".
std::string replay_trial_id(std::string_view approach, std::string_view model, std::string_view task,
                            std::int64_t seed);

/// Detects free-text tool syntax such as `<function=name>{...}` or `<tool_call>`.
bool looks_like_text_tool_call(std::string_view content);

/// Chat-completion client. Immutable after construction; the replay script is
/// shared between clients derived with for_trial().
class LlmClient {
 public:
  /// Throws std::invalid_argument on inconsistent config and std::runtime_error
  /// if the replay file cannot be loaded.
  explicit LlmClient(LlmConfig config);
  LlmClient(LlmConfig config, std::shared_ptr<const ReplayScript> script);

  /// A client for one conversation; replay turns are looked up under trial_id.
  LlmClient for_trial(std::string trial_id) const;

  /// Precondition: messages non-empty and messages[0] is a system message.
  /// Replay turn index = number of assistant messages already in `messages`.
  /// Throws LlmError.
  Completion complete(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools = {}) const;

  const LlmConfig& config() const { return config_; }

 private:
  Completion complete_replay(std::span<const ChatMessage> messages) const;
  Completion complete_http(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools) const;

  LlmConfig config_;
  std::shared_ptr<const ReplayScript> script_;
};

/// Free-function form of LlmClient::complete.
Completion complete(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools, const LlmConfig& config);

/// JSON forms shared by transcripts and replay files.
nlohmann::ordered_json to_json(const ChatMessage& m);
ChatMessage chat_message_from_json(const nlohmann::json& j);  // throws std::runtime_error
nlohmann::ordered_json to_json(const CompletionUsage& u);
CompletionUsage usage_from_json(const nlohmann::json& j);

/// Environment variables consulted for the http backend's bearer token.
inline constexpr const char* kLlmTokenEnv = "CPGQL_LLM_TOKEN";
inline constexpr const char* kLlmTokenFallbackEnv = "HF_TOKEN";

}  // namespace cpgql
