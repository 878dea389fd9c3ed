#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpgql/joern_client.hpp"
#include "cpgql/llm_client.hpp"
#include "cpgql/mapper.hpp"
#include "cpgql/pipelines.hpp"

namespace cpgql {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

/// Prints compile(parse_spec(file)). 1 on an invalid spec, 2 if the file is unreadable.
int cmd_compile(const std::string& spec_path, FlowProjection projection, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  std::string benchmark_path;
  BackendConfig joern;
  /// Checked for leakage in addition to the shipped prompts.
  std::vector<std::string> extra_prompt_files;
  /// When set, the captured ground-truth outputs are saved here as a fixture.
  std::optional<std::string> record_fixture_path;
};

/// load_benchmark + validate_ground_truth + leakage_check. 0 iff everything passes.
int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

struct RunPlan {
  std::vector<ApproachId> approaches;
  std::vector<std::string> model_ids;
  std::vector<std::int64_t> seeds{42, 43, 44};
  std::string benchmark_path;
  /// Backend, endpoint, replay file, temperature and timeouts; model_id, seed
  /// and trial_id are filled in per trial.
  LlmConfig llm;
  BackendConfig joern;
  std::string output_path;  // JSONL, appended to
  /// Restricts the run to these task ids when non-empty.
  std::vector<std::string> task_ids;
  /// Concurrent trials; values above 1 need the replay and fixture backends.
  unsigned jobs = 1;
  PipelineOptions pipeline;

  /// Empty when runnable; otherwise the violated requirement.
  std::optional<std::string> check() const;
};

struct RunSummary {
  std::size_t planned = 0;
  std::size_t skipped = 0;  // already present in the output file
  std::size_t executed = 0;
  std::map<TrialStatus, std::size_t> statuses;
};

/// Runs every (approach, model, task, seed) combination in that order, skipping
/// keys already recorded in the output file. Records are appended in plan
/// order even when jobs > 1. Throws std::runtime_error on I/O problems.
RunSummary execute_plan(const RunPlan& plan, std::ostream& progress);

int cmd_run(const RunPlan& plan, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::string records_path;
  std::string benchmark_path;
  std::string format = "markdown";
  /// Backend the ground-truth queries are judged against.
  BackendConfig joern;
};

/// judge_trial + aggregate + coverage_analysis + emit_report.
int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);

}  // namespace cpgql
