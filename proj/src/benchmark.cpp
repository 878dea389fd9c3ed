#include "cpgql/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace cpgql {

using json = nlohmann::json;

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::structural: return "structural";
    case Tier::data_flow: return "data_flow";
    case Tier::composite: return "composite";
  }
  return "?";
}

std::string_view to_string(Project p) {
  switch (p) {
    case Project::commons_lang: return "commons_lang";
    case Project::webgoat: return "webgoat";
  }
  return "?";
}

std::optional<Tier> tier_from_string(std::string_view s) {
  for (Tier t : kAllTiers)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<Project> project_from_string(std::string_view s) {
  for (Project p : {Project::commons_lang, Project::webgoat})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::string_view to_string(LeakKind k) {
  return k == LeakKind::request_text ? "request_text" : "ground_truth_query";
}

const Task* BenchmarkSet::find(std::string_view id) const {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == id; });
  return it == tasks.end() ? nullptr : &*it;
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

char tier_prefix(Tier t) {
  switch (t) {
    case Tier::structural: return 'S';
    case Tier::data_flow: return 'D';
    case Tier::composite: return 'C';
  }
  return '?';
}

bool well_formed_id(std::string_view id) {
  return id.size() == 3 && (id[0] == 'S' || id[0] == 'D' || id[0] == 'C') &&
         std::isdigit(static_cast<unsigned char>(id[1])) && std::isdigit(static_cast<unsigned char>(id[2]));
}

std::string collapse_ws(std::string_view s, bool fold_case) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += fold_case ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c;
  }
  return out;
}

}  // namespace

BenchmarkError::BenchmarkError(std::vector<std::string> problems)
    : std::runtime_error("invalid benchmark:\n" + join_lines(problems)), problems_(std::move(problems)) {}

std::vector<std::string> check_benchmark(const BenchmarkSet& set) {
  std::vector<std::string> problems;
  std::map<Tier, std::size_t> tiers;
  std::map<Project, std::size_t> projects;
  std::set<std::string> seen;
  for (const auto& t : set.tasks) {
    ++tiers[t.tier];
    ++projects[t.project];
    if (!well_formed_id(t.id)) problems.push_back("task id '" + t.id + "' does not match ^[SDC][0-9]{2}$");
    else if (t.id[0] != tier_prefix(t.tier))
      problems.push_back("task " + t.id + ": id prefix does not match tier " + std::string(to_string(t.tier)));
    if (!seen.insert(t.id).second) problems.push_back("duplicate task id " + t.id);
    if (t.request.empty()) problems.push_back("task " + t.id + ": empty request");
    if (t.ground_truth_query.empty()) problems.push_back("task " + t.id + ": empty ground_truth_query");
  }
  auto expect = [&](std::string what, std::size_t got, std::size_t want) {
    if (got != want)
      problems.push_back(what + ": expected " + std::to_string(want) + ", found " + std::to_string(got));
  };
  expect("task count", set.tasks.size(), kBenchmarkTasks);
  expect("structural tasks", tiers[Tier::structural], kStructuralTasks);
  expect("data_flow tasks", tiers[Tier::data_flow], kDataFlowTasks);
  expect("composite tasks", tiers[Tier::composite], kCompositeTasks);
  expect("commons_lang tasks", projects[Project::commons_lang], kCommonsLangTasks);
  expect("webgoat tasks", projects[Project::webgoat], kWebGoatTasks);
  return problems;
}

BenchmarkSet benchmark_from_json(const json& doc) {
  std::vector<std::string> problems;
  BenchmarkSet set;
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
    throw BenchmarkError({"benchmark must be an object with a 'tasks' array"});
  std::size_t index = 0;
  for (const auto& tj : doc["tasks"]) {
    const std::string where = "tasks[" + std::to_string(index++) + "]";
    if (!tj.is_object()) {
      problems.push_back(where + ": not an object");
      continue;
    }
    for (const auto& [key, _] : tj.items()) {
      static const std::set<std::string> known{"id", "tier", "project", "request", "ground_truth_query"};
      if (!known.contains(key)) problems.push_back(where + ": unknown field '" + key + "'");
    }
    auto str = [&](const char* key) -> std::string {
      if (!tj.contains(key) || !tj[key].is_string()) {
        problems.push_back(where + ": missing string field '" + key + "'");
        return {};
      }
      return tj[key].get<std::string>();
    };
    Task t;
    t.id = str("id");
    const auto tier = str("tier");
    const auto project = str("project");
    t.request = str("request");
    t.ground_truth_query = str("ground_truth_query");
    if (auto v = tier_from_string(tier)) t.tier = *v;
    else if (!tier.empty()) problems.push_back(where + ": unknown tier '" + tier + "'");
    if (auto v = project_from_string(project)) t.project = *v;
    else if (!project.empty()) problems.push_back(where + ": unknown project '" + project + "'");
    set.tasks.push_back(std::move(t));
  }
  auto more = check_benchmark(set);
  problems.insert(problems.end(), more.begin(), more.end());
  if (!problems.empty()) throw BenchmarkError(std::move(problems));
  return set;
}

nlohmann::ordered_json to_json(const BenchmarkSet& set) {
  nlohmann::ordered_json doc;
  doc["format"] = "cpgql-benchmark/1";
  auto tasks = nlohmann::ordered_json::array();
  for (const auto& t : set.tasks) {
    nlohmann::ordered_json tj;
    tj["id"] = t.id;
    tj["tier"] = to_string(t.tier);
    tj["project"] = to_string(t.project);
    tj["request"] = t.request;
    tj["ground_truth_query"] = t.ground_truth_query;
    tasks.push_back(std::move(tj));
  }
  doc["tasks"] = std::move(tasks);
  return doc;
}

BenchmarkSet load_benchmark(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BenchmarkError({"cannot open benchmark file " + path});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw BenchmarkError({"benchmark file " + path + " is not valid JSON"});
  return benchmark_from_json(doc);
}

std::vector<GroundTruthCheck> validate_ground_truth(const BenchmarkSet& set, const JoernClient& joern) {
  std::vector<GroundTruthCheck> out;
  out.reserve(set.tasks.size());
  for (const auto& task : set.tasks) {
    GroundTruthCheck c;
    c.task_id = task.id;
    c.result = joern.execute(task.ground_truth_query);
    if (!c.result.ok) {
      c.reason = std::string(to_string(c.result.error_kind)) + ": " + c.result.error_message.value_or("");
    } else if (c.result.normalized_output.empty()) {
      c.reason = "empty result";
    } else {
      c.passed = true;
    }
    out.push_back(std::move(c));
  }
  return out;
}

Fixture fixture_from_checks(const BenchmarkSet& set, const std::vector<GroundTruthCheck>& checks) {
  Fixture f;
  for (const auto& c : checks) {
    const Task* t = set.find(c.task_id);
    if (t && c.result.ok) f.put(t->ground_truth_query, c.result.raw_output);
  }
  return f;
}

std::vector<LeakFinding> leakage_check(const BenchmarkSet& set, const std::vector<PromptFile>& prompts) {
  std::vector<LeakFinding> findings;
  for (const auto& p : prompts) {
    const std::string folded = collapse_ws(p.text, true);
    const std::string collapsed = collapse_ws(p.text, false);
    for (const auto& t : set.tasks) {
      const std::string request = collapse_ws(t.request, true);
      if (!request.empty() && folded.find(request) != std::string::npos)
        findings.push_back({t.id, p.name, LeakKind::request_text});
      const std::string gt = collapse_ws(t.ground_truth_query, false);
      if (!gt.empty() && collapsed.find(gt) != std::string::npos)
        findings.push_back({t.id, p.name, LeakKind::ground_truth_query});
    }
  }
  return findings;
}

std::map<std::string, QuerySpec> load_reference_specs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open reference specs " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::runtime_error("reference specs file is not a JSON object");
  const json& specs = doc.contains("specs") ? doc["specs"] : doc;
  std::map<std::string, QuerySpec> out;
  std::string problems;
  for (const auto& [id, sj] : specs.items()) {
    auto r = validate_spec(sj);
    if (!r.ok()) {
      problems += id + ":\n" + format_errors(r.errors);
      continue;
    }
    out.emplace(id, std::move(*r.spec));
  }
  if (!problems.empty()) throw std::runtime_error("invalid reference specs:\n" + problems);
  return out;
}

}  // namespace cpgql
