#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpgql/pipelines.hpp"

namespace cpgql {

// JSONL trial records, one object per line:
//   {"format": "cpgql-trial/1", "task_id", "approach", "model_id", "seed",
//    "outcome": {"status", "attempts", "steps", "tool_calls",
//                "final_output"?, "generated_query"?, "failure_detail"?},
//    "usage": {"input_tokens", "output_tokens"},
//    "transcript": [ChatMessage...],
//    "wall_time_ms": N}
inline constexpr const char* kTrialFormat = "cpgql-trial/1";

/// wall_time_ms is always the last key, so it can be left out for comparisons.
nlohmann::ordered_json to_json(const TrialRecord& r, bool include_wall_time = true);
TrialRecord trial_record_from_json(const nlohmann::json& j);  // throws std::runtime_error

/// Resume key. Wall-clock time is not part of a trial's identity.
struct TrialKey {
  ApproachId approach = ApproachId::A1_direct;
  std::string model_id;
  std::string task_id;
  std::int64_t seed = 0;

  auto operator<=>(const TrialKey&) const = default;
};

TrialKey key_of(const TrialRecord& r);

void write_trial_line(std::ostream& out, const TrialRecord& r);

/// Blank lines are skipped. Throws std::runtime_error naming the bad line.
std::vector<TrialRecord> read_trial_records(std::istream& in);
std::vector<TrialRecord> read_trial_records(const std::string& path);

}  // namespace cpgql
