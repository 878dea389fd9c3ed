#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpgql/benchmark.hpp"
#include "cpgql/pipelines.hpp"

namespace cpgql {

struct MatchVerdict {
  bool result_match = false;
  bool relaxed_match = false;
  std::optional<bool> exact_match;  // A1/A2 only

  bool operator==(const MatchVerdict&) const = default;
};

/// The ground-truth query could not be executed: the benchmark is broken, not the trial.
class VerdictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Elements of a `Name(a, b, ...)` shaped output split on top-level commas
/// (commas inside parentheses, brackets, braces or quotes do not split).
/// nullopt when the text is not of that shape.
std::optional<std::vector<std::string>> list_elements(std::string_view normalized);

/// Order-insensitive equality: multiset comparison of list elements when both
/// sides are list-shaped, plain string equality otherwise.
bool outputs_match(std::string_view a, std::string_view b);

/// Contents of every double-quoted segment (backslash escapes kept verbatim).
std::set<std::string> quoted_strings(std::string_view text);

/// Verdict for a trial given the ground truth's normalized output.
/// relaxed_match is defined as result_match OR equal quoted-string sets, so
/// the implication result_match => relaxed_match holds by construction.
MatchVerdict judge_output(const TrialRecord& record, const Task& task, std::string_view ground_truth_output);

/// Executes the ground-truth query and judges. Throws VerdictError when the
/// ground truth fails to run.
MatchVerdict judge_trial(const TrialRecord& record, const Task& task, const JoernClient& joern);

/// Rounds to one decimal place, half away from zero.
double round1(double x);
/// 100 * num / den rounded to 0.1; 0 when den == 0.
double percentage(std::size_t num, std::size_t den);

struct FiveNumberSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  bool operator==(const FiveNumberSummary&) const = default;
};

/// Inclusive quartiles: linear interpolation at position (n - 1) * q of the
/// sorted sample. nullopt for an empty sample.
std::optional<FiveNumberSummary> five_number_summary(std::vector<double> values);

/// Execution success. Every approach counts it as status == success: A1 the
/// query ran, A2 the QuerySpec validated, compiled and ran, A3 the loop ended with
/// an answer.
bool execution_succeeded(const TrialRecord& r);

struct CellAggregate {
  std::string model_id;
  ApproachId approach = ApproachId::A1_direct;
  std::size_t trials = 0;                   // included in denominators
  std::size_t infrastructure_failures = 0;  // excluded, reported separately
  std::size_t result_matches = 0;
  std::size_t relaxed_matches = 0;
  std::size_t exec_successes = 0;
  std::optional<std::size_t> exact_matches;  // A1/A2
  double result_match_rate = 0;
  double relaxed_match_rate = 0;
  double exec_success_rate = 0;
  std::optional<double> exact_match_rate;
  double mean_attempts = 0;
  std::optional<double> mean_steps;       // A3, one decimal
  std::optional<double> mean_tool_calls;  // A3, one decimal
  std::optional<FiveNumberSummary> token_stats;  // per-trial total tokens

  bool operator==(const CellAggregate&) const = default;
};

struct TierRow {
  std::string model_id;
  ApproachId approach = ApproachId::A1_direct;
  std::optional<Tier> tier;  // nullopt = all tiers
  std::size_t matches = 0;
  std::size_t trials = 0;
  double rate = 0;

  bool operator==(const TierRow&) const = default;
};

enum class SetRelation { equal, strict_subset, strict_superset, incomparable };
std::string_view to_string(SetRelation r);  // "equal", "strict subset", ...
SetRelation compare_sets(const std::set<std::string>& a, const std::set<std::string>& b);

/// ✓ when every repetition solved the task, — when none did, • otherwise.
std::string_view tally_glyph(std::size_t solved, std::size_t reps);

struct TaskTally {
  std::string task_id;
  Tier tier = Tier::structural;
  std::map<ApproachId, std::size_t> solved;
  std::map<ApproachId, std::size_t> reps;

  bool operator==(const TaskTally&) const = default;
};

struct PairRelation {
  ApproachId a = ApproachId::A1_direct;
  ApproachId b = ApproachId::A1_direct;
  SetRelation relation = SetRelation::equal;  // solved(a) relative to solved(b)

  bool operator==(const PairRelation&) const = default;
};

struct CoverageReport {
  std::string model_id;
  std::map<ApproachId, std::set<std::string>> solved;  // tasks solved at least once
  std::vector<PairRelation> relations;                 // every ordered pair a < b
  std::vector<TaskTally> tallies;                      // benchmark order

  bool operator==(const CoverageReport&) const = default;
};

struct AggregateReport {
  std::vector<CellAggregate> cells;       // sorted by model, approach
  std::vector<TierRow> tiers;             // model, approach, tier order, then the all row
  std::vector<CoverageReport> coverage;   // per model

  bool empty() const { return cells.empty(); }
  bool operator==(const AggregateReport&) const = default;
};

/// `verdicts` is parallel to `records`. Records for tasks missing from the
/// benchmark throw std::invalid_argument. Result is independent of input order.
std::vector<CellAggregate> aggregate_cells(const std::vector<TrialRecord>& records,
                                           const std::vector<MatchVerdict>& verdicts);
std::vector<TierRow> aggregate_tiers(const std::vector<TrialRecord>& records, const std::vector<MatchVerdict>& verdicts,
                                     const BenchmarkSet& benchmark);
std::vector<CoverageReport> coverage_analysis(const std::vector<TrialRecord>& records,
                                              const std::vector<MatchVerdict>& verdicts,
                                              const BenchmarkSet& benchmark);
AggregateReport aggregate(const std::vector<TrialRecord>& records, const std::vector<MatchVerdict>& verdicts,
                          const BenchmarkSet& benchmark);

/// p^steps. Throws std::domain_error unless 0 <= p <= 1 and steps >= 0.
double compound_success(double per_step_accuracy, double steps);

}  // namespace cpgql
