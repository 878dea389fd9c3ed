#include "cpgql/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "http_util.hpp"

namespace cpgql {

using json = nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (Role r : {Role::system, Role::user, Role::assistant, Role::tool})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::string_view to_string(LlmErrorKind k) {
  switch (k) {
    case LlmErrorKind::transport_error: return "transport_error";
    case LlmErrorKind::rate_limited: return "rate_limited";
    case LlmErrorKind::replay_exhausted: return "replay_exhausted";
    case LlmErrorKind::malformed_tool_call: return "malformed_tool_call";
  }
  return "?";
}

CompletionUsage count_usage(std::span<const CompletionUsage> usages) {
  CompletionUsage total;
  for (const auto& u : usages) total += u;
  return total;
}

ChatMessage ChatMessage::system(std::string content) { return {Role::system, std::move(content), {}, {}, {}}; }
ChatMessage ChatMessage::user(std::string content) { return {Role::user, std::move(content), {}, {}, {}}; }
ChatMessage ChatMessage::assistant(std::string content, std::vector<ToolCall> calls) {
  return {Role::assistant, std::move(content), std::move(calls), {}, {}};
}
ChatMessage ChatMessage::tool(std::string call_id, std::string content) {
  return {Role::tool, std::move(content), {}, std::move(call_id), {}};
}

std::optional<std::string> ChatMessage::check() const {
  if (role == Role::tool && !tool_call_id) return "tool message without tool_call_id";
  if (role != Role::assistant && !tool_calls.empty()) return "tool_calls on a non-assistant message";
  if (role != Role::tool && tool_call_id) return "tool_call_id on a non-tool message";
  return std::nullopt;
}

std::optional<std::string> LlmConfig::check() const {
  if (backend == LlmBackend::replay && !replay_path) return "replay backend requires a replay path";
  if (backend == LlmBackend::http && !endpoint) return "http backend requires an endpoint";
  if (temperature < 0.0) return "temperature must be non-negative";
  return std::nullopt;
}

bool looks_like_text_tool_call(std::string_view content) {
  return content.find("<function=") != std::string_view::npos ||
         content.find("<tool_call>") != std::string_view::npos ||
         content.find("<|python_tag|>") != std::string_view::npos;
}

std::string replay_trial_id(std::string_view approach, std::string_view model, std::string_view task,
                            std::int64_t seed) {
  std::string id;
  id += approach;
  id += '/';
  id += model;
  id += '/';
  id += task;
  id += '/';
  id += std::to_string(seed);
  return id;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const CompletionUsage& u) {
  nlohmann::ordered_json j;
  j["input_tokens"] = u.input_tokens;
  j["output_tokens"] = u.output_tokens;
  return j;
}

CompletionUsage usage_from_json(const json& j) {
  CompletionUsage u;
  u.input_tokens = j.value("input_tokens", std::int64_t{0});
  u.output_tokens = j.value("output_tokens", std::int64_t{0});
  if (u.input_tokens < 0 || u.output_tokens < 0) throw std::runtime_error("negative token count");
  return u;
}

nlohmann::ordered_json to_json(const ChatMessage& m) {
  nlohmann::ordered_json j;
  j["role"] = to_string(m.role);
  j["content"] = m.content;
  if (!m.tool_calls.empty()) {
    auto calls = nlohmann::ordered_json::array();
    for (const auto& c : m.tool_calls) {
      nlohmann::ordered_json cj;
      cj["id"] = c.id;
      cj["name"] = c.tool_name;
      cj["arguments"] = c.arguments;
      calls.push_back(std::move(cj));
    }
    j["tool_calls"] = std::move(calls);
  }
  if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
  if (m.usage) j["usage"] = to_json(*m.usage);
  return j;
}

namespace {

std::string arguments_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

ChatMessage chat_message_from_json(const json& j) {
  if (!j.is_object()) throw std::runtime_error("message is not an object");
  ChatMessage m;
  auto role = role_from_string(j.value("role", std::string("assistant")));
  if (!role) throw std::runtime_error("unknown message role");
  m.role = *role;
  if (j.contains("content") && j["content"].is_string()) m.content = j["content"].get<std::string>();
  if (j.contains("tool_calls") && j["tool_calls"].is_array()) {
    for (const auto& c : j["tool_calls"]) {
      ToolCall call;
      call.id = c.value("id", std::string());
      call.tool_name = c.value("name", std::string());
      if (c.contains("arguments")) call.arguments = arguments_text(c["arguments"]);
      m.tool_calls.push_back(std::move(call));
    }
  }
  if (j.contains("tool_call_id") && j["tool_call_id"].is_string()) m.tool_call_id = j["tool_call_id"].get<std::string>();
  if (j.contains("usage")) m.usage = usage_from_json(j["usage"]);
  if (auto problem = m.check()) throw std::runtime_error(*problem);
  return m;
}

// ---------------------------------------------------------------------------
// Replay script

ReplayScript ReplayScript::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("trials") || !doc["trials"].is_object())
    throw std::runtime_error("replay file must be an object with a 'trials' object");
  ReplayScript script;
  for (const auto& [trial, turns] : doc["trials"].items()) {
    if (!turns.is_array()) throw std::runtime_error("replay trial '" + trial + "' is not a list");
    auto& list = script.trials_[trial];
    for (const auto& t : turns) {
      Turn turn;
      json msg = t.at("assistant_message");
      msg["role"] = "assistant";
      turn.message = chat_message_from_json(msg);
      turn.usage = usage_from_json(t.value("usage", json::object()));
      list.push_back(std::move(turn));
    }
  }
  return script;
}

ReplayScript ReplayScript::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open replay file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error("replay file " + path + " is not valid JSON");
  return from_json(doc);
}

nlohmann::ordered_json ReplayScript::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "cpgql-replay/1";
  nlohmann::ordered_json trials = nlohmann::ordered_json::object();
  for (const auto& [id, turns] : trials_) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& t : turns) {
      auto msg = cpgql::to_json(t.message);
      msg.erase("role");
      msg.erase("usage");
      nlohmann::ordered_json tj;
      tj["assistant_message"] = std::move(msg);
      tj["usage"] = cpgql::to_json(t.usage);
      list.push_back(std::move(tj));
    }
    trials[id] = std::move(list);
  }
  doc["trials"] = std::move(trials);
  return doc;
}

void ReplayScript::add_turn(const std::string& trial_id, Turn turn) { trials_[trial_id].push_back(std::move(turn)); }

const std::vector<ReplayScript::Turn>* ReplayScript::turns(const std::string& trial_id) const {
  auto it = trials_.find(trial_id);
  return it == trials_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(LlmConfig config) : config_(std::move(config)) {
  if (auto problem = config_.check()) throw std::invalid_argument(*problem);
  if (config_.backend == LlmBackend::replay)
    script_ = std::make_shared<const ReplayScript>(ReplayScript::load(*config_.replay_path));
}

LlmClient::LlmClient(LlmConfig config, std::shared_ptr<const ReplayScript> script)
    : config_(std::move(config)), script_(std::move(script)) {
  config_.backend = LlmBackend::replay;
}

LlmClient LlmClient::for_trial(std::string trial_id) const {
  LlmClient copy = *this;
  copy.config_.trial_id = std::move(trial_id);
  return copy;
}

Completion LlmClient::complete(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools) const {
  if (messages.empty() || messages.front().role != Role::system)
    throw std::invalid_argument("conversation must start with a system message");
  Completion c = config_.backend == LlmBackend::replay ? complete_replay(messages) : complete_http(messages, tools);
  if (c.message.tool_calls.empty() && looks_like_text_tool_call(c.message.content))
    throw LlmError(LlmErrorKind::malformed_tool_call, "assistant emitted tool syntax as text instead of a tool call",
                   c.usage, c.message.content);
  for (const auto& call : c.message.tool_calls) {
    json args = json::parse(call.arguments, nullptr, false);
    if (call.tool_name.empty() || args.is_discarded() || !args.is_object())
      throw LlmError(LlmErrorKind::malformed_tool_call, "tool call '" + call.tool_name + "' has unparseable arguments",
                     c.usage, call.arguments);
  }
  c.message.usage = c.usage;
  return c;
}

Completion LlmClient::complete_replay(std::span<const ChatMessage> messages) const {
  if (!script_) throw LlmError(LlmErrorKind::transport_error, "replay backend has no script loaded");
  const std::string trial = config_.trial_id.value_or("");
  const auto* turns = script_->turns(trial);
  const auto index = static_cast<std::size_t>(
      std::count_if(messages.begin(), messages.end(), [](const ChatMessage& m) { return m.role == Role::assistant; }));
  if (!turns || index >= turns->size())
    throw LlmError(LlmErrorKind::replay_exhausted,
                   "replay script for '" + trial + "' has no turn " + std::to_string(index));
  const auto& turn = (*turns)[index];
  return {turn.message, turn.usage};
}

namespace {

json wire_message(const ChatMessage& m) {
  json j{{"role", std::string(to_string(m.role))}, {"content", m.content}};
  if (!m.tool_calls.empty()) {
    json calls = json::array();
    for (const auto& c : m.tool_calls)
      calls.push_back({{"id", c.id}, {"type", "function"}, {"function", {{"name", c.tool_name}, {"arguments", c.arguments}}}});
    j["tool_calls"] = std::move(calls);
  }
  if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
  return j;
}

std::optional<std::string> bearer_token() {
  for (const char* var : {kLlmTokenEnv, kLlmTokenFallbackEnv})
    if (const char* v = std::getenv(var); v && *v) return std::string(v);
  return std::nullopt;
}

}  // namespace

Completion LlmClient::complete_http(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools) const {
  auto url = detail::split_url(*config_.endpoint);
  if (!url) throw LlmError(LlmErrorKind::transport_error, "invalid endpoint URL " + *config_.endpoint);

  json body{{"model", config_.model_id}, {"temperature", config_.temperature}, {"seed", config_.seed}};
  body["messages"] = json::array();
  for (const auto& m : messages) body["messages"].push_back(wire_message(m));
  if (!tools.empty()) {
    body["tools"] = json::array();
    for (const auto& t : tools)
      body["tools"].push_back(
          {{"type", "function"},
           {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
  }

  httplib::Headers headers;
  if (auto token = bearer_token()) headers.emplace("Authorization", "Bearer " + *token);

  constexpr int kMaxTries = 3;
  for (int attempt = 1;; ++attempt) {
    httplib::Client client(url->origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    auto res = client.Post(url->path.empty() ? "/" : url->path, headers, body.dump(), "application/json");
    if (!res) throw LlmError(LlmErrorKind::transport_error, "request failed: " + httplib::to_string(res.error()));
    if (res->status == 429) {
      if (attempt == kMaxTries)
        throw LlmError(LlmErrorKind::rate_limited, "rate limited after " + std::to_string(kMaxTries) + " tries");
      std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
      continue;
    }
    if (res->status != 200)
      throw LlmError(LlmErrorKind::transport_error, "server returned HTTP " + std::to_string(res->status));

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
      throw LlmError(LlmErrorKind::transport_error, "reply has no choices");
    const json& msg = reply["choices"][0].value("message", json::object());

    Completion c;
    if (reply.contains("usage") && reply["usage"].is_object()) {
      c.usage.input_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
      c.usage.output_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
    }
    c.message.role = Role::assistant;
    if (msg.contains("content") && msg["content"].is_string()) c.message.content = msg["content"].get<std::string>();
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array()) {
      for (const auto& tc : msg["tool_calls"]) {
        ToolCall call;
        call.id = tc.value("id", std::string());
        const json fn = tc.value("function", json::object());
        call.tool_name = fn.value("name", std::string());
        if (fn.contains("arguments")) call.arguments = arguments_text(fn["arguments"]);
        c.message.tool_calls.push_back(std::move(call));
      }
    }
    return c;
  }
}

Completion complete(std::span<const ChatMessage> messages, std::span<const ToolSchema> tools, const LlmConfig& config) {
  return LlmClient(config).complete(messages, tools);
}

}  // namespace cpgql
