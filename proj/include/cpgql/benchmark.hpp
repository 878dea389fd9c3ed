#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpgql/ir_schema.hpp"
#include "cpgql/joern_client.hpp"
#include "cpgql/prompts.hpp"

namespace cpgql {

enum class Tier { structural, data_flow, composite };
enum class Project { commons_lang, webgoat };

inline constexpr std::array kAllTiers{Tier::structural, Tier::data_flow, Tier::composite};

std::string_view to_string(Tier t);
std::string_view to_string(Project p);
std::optional<Tier> tier_from_string(std::string_view s);
std::optional<Project> project_from_string(std::string_view s);

struct Task {
  std::string id;  // ^[SDC][0-9]{2}$, prefix matches tier
  Tier tier = Tier::structural;
  Project project = Project::commons_lang;
  std::string request;
  std::string ground_truth_query;

  bool operator==(const Task&) const = default;
};

struct BenchmarkSet {
  std::vector<Task> tasks;

  const Task* find(std::string_view id) const;
  bool operator==(const BenchmarkSet&) const = default;
};

/// Thrown by load_benchmark; what() lists every violation, one per line.
class BenchmarkError : public std::runtime_error {
 public:
  explicit BenchmarkError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Expected benchmark composition.
inline constexpr std::size_t kBenchmarkTasks = 20;
inline constexpr std::size_t kStructuralTasks = 7;
inline constexpr std::size_t kDataFlowTasks = 7;
inline constexpr std::size_t kCompositeTasks = 6;
inline constexpr std::size_t kCommonsLangTasks = 9;
inline constexpr std::size_t kWebGoatTasks = 11;

/// Every invariant violation in the set; empty when valid.
std::vector<std::string> check_benchmark(const BenchmarkSet& set);

BenchmarkSet benchmark_from_json(const nlohmann::json& doc);  // throws BenchmarkError
nlohmann::ordered_json to_json(const BenchmarkSet& set);

/// Reads and fully validates a benchmark file. Throws BenchmarkError.
BenchmarkSet load_benchmark(const std::string& path);

struct GroundTruthCheck {
  std::string task_id;
  bool passed = false;
  std::string reason;  // empty when passed
  ExecutionResult result;
};

/// Runs every ground-truth query; passes iff it executed and printed something.
/// Never stops early. The captured outputs can be saved as a fixture.
std::vector<GroundTruthCheck> validate_ground_truth(const BenchmarkSet& set, const JoernClient& joern);

/// Builds a fixture from captured ground-truth outputs (successful runs only).
Fixture fixture_from_checks(const BenchmarkSet& set, const std::vector<GroundTruthCheck>& checks);

enum class LeakKind { request_text, ground_truth_query };

struct LeakFinding {
  std::string task_id;
  std::string file;
  LeakKind kind = LeakKind::request_text;
};

std::string_view to_string(LeakKind k);

/// Flags prompt files that contain a task's request (whitespace-collapsed,
/// case-folded) or its ground-truth query (whitespace-collapsed).
std::vector<LeakFinding> leakage_check(const BenchmarkSet& set, const std::vector<PromptFile>& prompts);

/// Reference QuerySpecs per task id: {"S01": {...}, ...}. Throws std::runtime_error
/// naming every task whose spec fails validation.
std::map<std::string, QuerySpec> load_reference_specs(const std::string& path);

}  // namespace cpgql
