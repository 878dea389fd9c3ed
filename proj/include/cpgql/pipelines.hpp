#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpgql/benchmark.hpp"
#include "cpgql/joern_client.hpp"
#include "cpgql/llm_client.hpp"

namespace cpgql {

enum class ApproachId { A1_direct, A2_structured, A3_agentic };

inline constexpr std::array kAllApproaches{ApproachId::A1_direct, ApproachId::A2_structured, ApproachId::A3_agentic};

std::string_view to_string(ApproachId a);
std::optional<ApproachId> approach_from_string(std::string_view s);
/// "A1", "A2", "A3".
std::string_view short_name(ApproachId a);

enum class TrialStatus { success, fail_retries_exhausted, fail_max_steps, fail_execution, fail_infrastructure };

std::string_view to_string(TrialStatus s);
std::optional<TrialStatus> trial_status_from_string(std::string_view s);

inline constexpr int kMaxAttempts = 3;
inline constexpr int kMaxAgentSteps = 10;

struct TrialOutcome {
  TrialStatus status = TrialStatus::fail_infrastructure;
  std::optional<std::string> final_output;     // normalized
  std::optional<std::string> generated_query;  // A1/A2 only
  int attempts = 0;
  int steps = 0;       // A3 only
  int tool_calls = 0;  // A3 only
  std::optional<std::string> failure_detail;

  bool operator==(const TrialOutcome&) const = default;
};

struct TrialRecord {
  std::string task_id;
  ApproachId approach = ApproachId::A1_direct;
  std::string model_id;
  std::int64_t seed = 0;
  std::vector<ChatMessage> transcript;
  CompletionUsage usage;
  TrialOutcome outcome;
  std::chrono::milliseconds wall_time{0};

  bool operator==(const TrialRecord&) const = default;
};

struct PipelineOptions {
  /// Error text fed back to the model is cut to this many characters.
  std::size_t error_feedback_cap = 2000;
};

/// Cuts `text` to `cap` characters, marking the cut.
std::string truncate_feedback(std::string_view text, std::size_t cap);

/// First fenced block's contents; else the first line starting with `cpg.` or
/// `def `; else the whole trimmed text.
std::string extract_query(std::string_view assistant_text);

/// The clients passed in should already be bound to the trial (LlmClient::for_trial).
TrialRecord run_direct(const Task& task, const LlmClient& llm, const JoernClient& joern,
                       const PipelineOptions& options = {});
TrialRecord run_structured(const Task& task, const LlmClient& llm, const JoernClient& joern,
                           const PipelineOptions& options = {});
TrialRecord run_agentic(const Task& task, const LlmClient& llm, const JoernClient& joern,
                        const PipelineOptions& options = {});

TrialRecord run_trial(ApproachId approach, const Task& task, const LlmClient& llm, const JoernClient& joern,
                      const PipelineOptions& options = {});

/// Sum of per-message usage over the transcript's assistant turns.
CompletionUsage transcript_usage(const std::vector<ChatMessage>& transcript);

/// Checks the record invariants (budgets, usage bookkeeping, A3 has no query,
/// success carries output). Returns every violation.
std::vector<std::string> check_trial_record(const TrialRecord& record);

}  // namespace cpgql
