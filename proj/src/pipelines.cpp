#include "cpgql/pipelines.hpp"

#include <algorithm>
#include <cctype>

#include "cpgql/mapper.hpp"
#include "cpgql/prompts.hpp"
#include "cpgql/tools.hpp"

namespace cpgql {

std::string_view to_string(ApproachId a) {
  switch (a) {
    case ApproachId::A1_direct: return "A1_direct";
    case ApproachId::A2_structured: return "A2_structured";
    case ApproachId::A3_agentic: return "A3_agentic";
  }
  return "?";
}

std::optional<ApproachId> approach_from_string(std::string_view s) {
  for (ApproachId a : kAllApproaches)
    if (to_string(a) == s || short_name(a) == s) return a;
  return std::nullopt;
}

std::string_view short_name(ApproachId a) {
  switch (a) {
    case ApproachId::A1_direct: return "A1";
    case ApproachId::A2_structured: return "A2";
    case ApproachId::A3_agentic: return "A3";
  }
  return "?";
}

std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::success: return "success";
    case TrialStatus::fail_retries_exhausted: return "fail_retries_exhausted";
    case TrialStatus::fail_max_steps: return "fail_max_steps";
    case TrialStatus::fail_execution: return "fail_execution";
    case TrialStatus::fail_infrastructure: return "fail_infrastructure";
  }
  return "?";
}

std::optional<TrialStatus> trial_status_from_string(std::string_view s) {
  for (TrialStatus t : {TrialStatus::success, TrialStatus::fail_retries_exhausted, TrialStatus::fail_max_steps,
                        TrialStatus::fail_execution, TrialStatus::fail_infrastructure})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::string truncate_feedback(std::string_view text, std::size_t cap) {
  if (text.size() <= cap) return std::string(text);
  std::string out(text.substr(0, cap));
  out += "\n[truncated: " + std::to_string(text.size() - cap) + " more characters]";
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::string_view> first_fenced_block(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = text.find('\n', open);
  if (body == std::string_view::npos) return std::nullopt;
  const auto close = text.find("```", body + 1);
  if (close == std::string_view::npos) return text.substr(body + 1);
  return text.substr(body + 1, close - body - 1);
}

// Shared trial scaffolding: transcript, usage and wall-clock bookkeeping.
class TrialRun {
 public:
  TrialRun(ApproachId approach, const Task& task, const LlmClient& llm, std::string system_prompt)
      : llm_(llm), start_(std::chrono::steady_clock::now()) {
    record_.task_id = task.id;
    record_.approach = approach;
    record_.model_id = llm.config().model_id;
    record_.seed = llm.config().seed;
    record_.transcript.push_back(ChatMessage::system(std::move(system_prompt)));
    record_.transcript.push_back(ChatMessage::user(task.request));
  }

  // One model call. On LlmError the trial is marked infrastructure-failed and
  // nullopt is returned; tokens billed for the failed call are still counted.
  std::optional<ChatMessage> ask(std::span<const ToolSchema> tools = {}) {
    try {
      Completion c = llm_.complete(record_.transcript, tools);
      record_.usage += c.usage;
      record_.transcript.push_back(c.message);
      return c.message;
    } catch (const LlmError& e) {
      if (e.usage()) {
        ChatMessage m = ChatMessage::assistant(e.raw_content());
        m.usage = *e.usage();
        record_.usage += *e.usage();
        record_.transcript.push_back(std::move(m));
      }
      outcome().status = TrialStatus::fail_infrastructure;
      outcome().failure_detail = std::string(to_string(e.kind())) + ": " + e.what();
      return std::nullopt;
    }
  }

  void say(std::string text) { record_.transcript.push_back(ChatMessage::user(std::move(text))); }
  void tool_result(std::string id, std::string text) {
    record_.transcript.push_back(ChatMessage::tool(std::move(id), std::move(text)));
  }

  TrialOutcome& outcome() { return record_.outcome; }

  TrialRecord finish(TrialStatus status) {
    record_.outcome.status = status;
    return finish();
  }

  TrialRecord finish() {
    record_.wall_time =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
    return std::move(record_);
  }

 private:
  const LlmClient& llm_;
  TrialRecord record_;
  std::chrono::steady_clock::time_point start_;
};

// Joern failures that say nothing about the query itself.
bool is_environment_failure(const ExecutionResult& r) {
  return r.is_transport_failure() || r.error_kind == ExecutionErrorKind::fixture_miss;
}

}  // namespace

std::string extract_query(std::string_view assistant_text) {
  if (auto block = first_fenced_block(assistant_text)) return std::string(trim(*block));
  std::size_t start = 0;
  while (start < assistant_text.size()) {
    auto end = assistant_text.find('\n', start);
    if (end == std::string_view::npos) end = assistant_text.size();
    const auto line = trim(assistant_text.substr(start, end - start));
    if (line.starts_with("cpg.") || line.starts_with("def ")) return std::string(line);
    start = end + 1;
  }
  return std::string(trim(assistant_text));
}

TrialRecord run_direct(const Task& task, const LlmClient& llm, const JoernClient& joern,
                       const PipelineOptions& options) {
  TrialRun run(ApproachId::A1_direct, task, llm, direct_system_prompt());
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    run.outcome().attempts = attempt;
    auto reply = run.ask();
    if (!reply) return run.finish();

    const std::string query = extract_query(reply->content);
    if (query.empty()) {
      run.outcome().failure_detail = "no query in response";
      if (attempt < kMaxAttempts)
        run.say("Your reply did not contain a CPGQL query. Reply with one query in a ```scala block.");
      continue;
    }
    run.outcome().generated_query = query;
    const ExecutionResult r = joern.execute(query);
    if (r.ok) {
      run.outcome().final_output = r.normalized_output;
      run.outcome().failure_detail.reset();
      return run.finish(TrialStatus::success);
    }
    run.outcome().failure_detail = r.error_message;
    if (is_environment_failure(r)) return run.finish(TrialStatus::fail_infrastructure);
    if (attempt < kMaxAttempts)
      run.say("Joern rejected the query:\n" + truncate_feedback(r.error_message.value_or(""), options.error_feedback_cap) +
              "\nReply with a corrected query.");
  }
  return run.finish(TrialStatus::fail_retries_exhausted);
}

TrialRecord run_structured(const Task& task, const LlmClient& llm, const JoernClient& joern,
                           const PipelineOptions& options) {
  TrialRun run(ApproachId::A2_structured, task, llm, structured_system_prompt());
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    run.outcome().attempts = attempt;
    auto reply = run.ask();
    if (!reply) return run.finish();

    const SpecParseResult parsed = parse_spec(reply->content);
    if (!parsed.ok()) {
      const std::string errors = format_errors(parsed.errors);
      run.outcome().failure_detail = errors;
      if (attempt < kMaxAttempts)
        run.say("The specification was rejected:\n" + truncate_feedback(errors, options.error_feedback_cap) +
                "Reply with a corrected JSON object.");
      continue;
    }

    // A valid specification is compiled and executed exactly once.
    const CpgqlQuery query = compile(*parsed.spec);
    run.outcome().generated_query = query.text;
    const ExecutionResult r = joern.execute(query.text);
    if (r.ok) {
      run.outcome().final_output = r.normalized_output;
      run.outcome().failure_detail.reset();
      return run.finish(TrialStatus::success);
    }
    run.outcome().failure_detail = r.error_message;
    return run.finish(is_environment_failure(r) ? TrialStatus::fail_infrastructure : TrialStatus::fail_execution);
  }
  return run.finish(TrialStatus::fail_retries_exhausted);
}

TrialRecord run_agentic(const Task& task, const LlmClient& llm, const JoernClient& joern,
                        const PipelineOptions& options) {
  TrialRun run(ApproachId::A3_agentic, task, llm, agentic_system_prompt());
  run.outcome().attempts = 1;
  const auto& tools = agent_tool_schemas();
  for (int step = 1; step <= kMaxAgentSteps; ++step) {
    run.outcome().steps = step;
    auto reply = run.ask(tools);
    if (!reply) return run.finish();

    if (!reply->tool_calls.empty()) {
      for (const auto& call : reply->tool_calls) {
        std::string observation = tool_dispatch(call, joern);
        if (observation.starts_with("error:")) observation = truncate_feedback(observation, options.error_feedback_cap);
        run.tool_result(call.id, std::move(observation));
        ++run.outcome().tool_calls;
      }
      continue;
    }
    if (trim(reply->content).empty()) {
      run.outcome().failure_detail = "empty final answer";
      return run.finish(TrialStatus::fail_execution);
    }
    run.outcome().final_output = normalize(reply->content);
    return run.finish(TrialStatus::success);
  }
  run.outcome().failure_detail = "step budget exhausted";
  return run.finish(TrialStatus::fail_max_steps);
}

TrialRecord run_trial(ApproachId approach, const Task& task, const LlmClient& llm, const JoernClient& joern,
                      const PipelineOptions& options) {
  switch (approach) {
    case ApproachId::A1_direct: return run_direct(task, llm, joern, options);
    case ApproachId::A2_structured: return run_structured(task, llm, joern, options);
    case ApproachId::A3_agentic: return run_agentic(task, llm, joern, options);
  }
  throw std::logic_error("unhandled approach");
}

CompletionUsage transcript_usage(const std::vector<ChatMessage>& transcript) {
  CompletionUsage total;
  for (const auto& m : transcript)
    if (m.role == Role::assistant && m.usage) total += *m.usage;
  return total;
}

std::vector<std::string> check_trial_record(const TrialRecord& r) {
  std::vector<std::string> problems;
  const auto& o = r.outcome;
  const std::string expected_prompt = r.approach == ApproachId::A1_direct       ? direct_system_prompt()
                                      : r.approach == ApproachId::A2_structured ? structured_system_prompt()
                                                                                : agentic_system_prompt();
  if (r.transcript.empty() || r.transcript.front().role != Role::system || r.transcript.front().content != expected_prompt)
    problems.push_back("transcript does not begin with the approach's system prompt");
  if (transcript_usage(r.transcript) != r.usage) problems.push_back("usage differs from the transcript sum");
  for (const auto& m : r.transcript)
    if (auto p = m.check()) problems.push_back("transcript message: " + *p);
  if (o.status == TrialStatus::success && !o.final_output) problems.push_back("success without final_output");

  const auto assistant_turns = std::count_if(r.transcript.begin(), r.transcript.end(),
                                             [](const ChatMessage& m) { return m.role == Role::assistant; });
  // A model call that failed outright leaves no assistant message behind.
  const auto counted = [&](int n) {
    return n == assistant_turns || (o.status == TrialStatus::fail_infrastructure && n == assistant_turns + 1);
  };
  if (r.approach == ApproachId::A3_agentic) {
    if (o.steps > kMaxAgentSteps) problems.push_back("steps exceed the agent budget");
    if (o.generated_query) problems.push_back("agentic trial carries a generated query");
    if (!counted(o.steps)) problems.push_back("steps differ from assistant turns");
  } else {
    if (o.attempts < 1 || o.attempts > kMaxAttempts) problems.push_back("attempts outside 1..3");
    if (o.steps != 0 || o.tool_calls != 0) problems.push_back("steps/tool_calls set on a non-agentic trial");
    if (!counted(o.attempts)) problems.push_back("attempts differ from assistant turns");
  }
  if (r.approach == ApproachId::A2_structured) {
    int seen = 0;
    for (const auto& m : r.transcript) {
      if (m.role != Role::assistant) continue;
      ++seen;
      if (seen < assistant_turns && parse_spec(m.content).ok())
        problems.push_back("structured trial retried after a valid specification");
    }
  }
  return problems;
}

}  // namespace cpgql
