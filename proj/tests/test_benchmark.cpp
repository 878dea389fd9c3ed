#include <gtest/gtest.h>

#include <chrono>

#include "cpgql/benchmark.hpp"
#include "cpgql/mapper.hpp"
#include "test_support.hpp"

using namespace cpgql;
using nlohmann::json;

namespace {

std::string shipped_benchmark() { return test::source_path("data/benchmark/benchmark.json"); }
std::string shipped_fixture() { return test::source_path("data/fixtures/joern_fixture.json"); }

json shipped_doc() { return json::parse(test::read_file(shipped_benchmark())); }

std::vector<std::string> problems_of(const json& doc) {
  try {
    benchmark_from_json(doc);
  } catch (const BenchmarkError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, std::string_view text) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(text) != std::string::npos; });
}

}  // namespace

TEST(Benchmark, ShippedSetLoads) {
  const auto set = load_benchmark(shipped_benchmark());
  ASSERT_EQ(set.tasks.size(), 20u);
  std::map<Tier, int> tiers;
  std::map<Project, int> projects;
  for (const auto& t : set.tasks) {
    ++tiers[t.tier];
    ++projects[t.project];
  }
  EXPECT_EQ(tiers[Tier::structural], 7);
  EXPECT_EQ(tiers[Tier::data_flow], 7);
  EXPECT_EQ(tiers[Tier::composite], 6);
  EXPECT_EQ(projects[Project::commons_lang], 9);
  EXPECT_EQ(projects[Project::webgoat], 11);
  ASSERT_NE(set.find("D01"), nullptr);
  EXPECT_EQ(set.find("D01")->tier, Tier::data_flow);
  EXPECT_EQ(set.find("X01"), nullptr);
}

TEST(Benchmark, NineteenTasksRejected) {
  json doc = shipped_doc();
  doc["tasks"].erase(doc["tasks"].size() - 1);
  const auto p = problems_of(doc);
  EXPECT_TRUE(mentions(p, "task count: expected 20, found 19"));
  EXPECT_TRUE(mentions(p, "composite tasks: expected 6, found 5"));
}

TEST(Benchmark, DuplicateIdRejected) {
  json doc = shipped_doc();
  doc["tasks"][1]["id"] = doc["tasks"][0]["id"];
  EXPECT_TRUE(mentions(problems_of(doc), "duplicate task id S01"));
}

TEST(Benchmark, IdShapeAndTierPrefix) {
  json doc = shipped_doc();
  doc["tasks"][0]["id"] = "S1";
  doc["tasks"][1]["id"] = "D99";
  const auto p = problems_of(doc);
  EXPECT_TRUE(mentions(p, "'S1' does not match"));
  EXPECT_TRUE(mentions(p, "D99: id prefix does not match tier structural"));
}

TEST(Benchmark, ProjectSplitEnforced) {
  json doc = shipped_doc();
  for (auto& t : doc["tasks"])
    if (t["project"] == "commons_lang") {
      t["project"] = "webgoat";
      break;
    }
  const auto p = problems_of(doc);
  EXPECT_TRUE(mentions(p, "commons_lang tasks: expected 9, found 8"));
  EXPECT_TRUE(mentions(p, "webgoat tasks: expected 11, found 12"));
}

TEST(Benchmark, FieldErrorsAllReported) {
  json doc = shipped_doc();
  doc["tasks"][0].erase("request");
  doc["tasks"][2]["tier"] = "dataflow";
  doc["tasks"][3]["notes"] = "x";
  const auto p = problems_of(doc);
  EXPECT_TRUE(mentions(p, "tasks[0]: missing string field 'request'"));
  EXPECT_TRUE(mentions(p, "tasks[2]: unknown tier 'dataflow'"));
  EXPECT_TRUE(mentions(p, "tasks[3]: unknown field 'notes'"));
  EXPECT_THROW(benchmark_from_json(json::array()), BenchmarkError);
  EXPECT_THROW(load_benchmark("/nonexistent/benchmark.json"), BenchmarkError);
}

TEST(Benchmark, JsonRoundTrip) {
  const auto set = load_benchmark(shipped_benchmark());
  EXPECT_EQ(benchmark_from_json(json::parse(to_json(set).dump())), set);
}

TEST(Leakage, ShippedPromptsAreClean) {
  const auto set = load_benchmark(shipped_benchmark());
  EXPECT_TRUE(leakage_check(set, shipped_prompt_files()).empty());
}

TEST(Leakage, PlantedLeaksCaught) {
  const auto set = load_benchmark(shipped_benchmark());
  const Task& t = *set.find("S04");
  auto prompts = shipped_prompt_files();
  std::string request = t.request;
  for (auto& c : request) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  prompts.push_back({"planted_request.md", "Example:\n" + request + "\n"});
  std::string gt = t.ground_truth_query;
  ASSERT_NE(gt.find(' '), std::string::npos);
  for (std::size_t pos = 0; (pos = gt.find(' ', pos)) != std::string::npos; pos += 3) gt.replace(pos, 1, "\n\t ");
  prompts.push_back({"planted_query.md", "Answer: " + gt});
  const auto findings = leakage_check(set, prompts);
  ASSERT_EQ(findings.size(), 2u);
  EXPECT_EQ(findings[0].task_id, "S04");
  EXPECT_EQ(findings[0].file, "planted_request.md");
  EXPECT_EQ(findings[0].kind, LeakKind::request_text);
  EXPECT_EQ(findings[1].file, "planted_query.md");
  EXPECT_EQ(findings[1].kind, LeakKind::ground_truth_query);
}

TEST(Leakage, SimilarButDifferentTextIsNotALeak) {
  const auto set = load_benchmark(shipped_benchmark());
  std::vector<PromptFile> prompts{{"near.md", set.find("D01")->request.substr(0, 30) + " something else"}};
  EXPECT_TRUE(leakage_check(set, prompts).empty());
}

TEST(GroundTruth, AllPassOnShippedFixture) {
  const auto set = load_benchmark(shipped_benchmark());
  JoernClient joern(BackendConfig::fixture(shipped_fixture()));
  const auto checks = validate_ground_truth(set, joern);
  ASSERT_EQ(checks.size(), 20u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.task_id << ": " << c.reason;
  const Fixture recorded = fixture_from_checks(set, checks);
  EXPECT_EQ(recorded.size(), 20u);
}

TEST(GroundTruth, FailuresNamedAndNeverStopEarly) {
  auto set = load_benchmark(shipped_benchmark());
  set.tasks[0].ground_truth_query = "cpg.not.recorded.l";
  set.tasks[5].ground_truth_query = "cpg.also.missing.l";
  JoernClient joern(BackendConfig::fixture(shipped_fixture()));
  const auto checks = validate_ground_truth(set, joern);
  ASSERT_EQ(checks.size(), 20u);
  EXPECT_FALSE(checks[0].passed);
  EXPECT_EQ(checks[0].reason.rfind("fixture_miss", 0), 0u);
  EXPECT_FALSE(checks[5].passed);
  EXPECT_EQ(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.passed; }), 18);
  EXPECT_EQ(fixture_from_checks(set, checks).size(), 18u);
}

TEST(GroundTruth, EmptyOutputFails) {
  BenchmarkSet set = load_benchmark(shipped_benchmark());
  Fixture f = Fixture::load(shipped_fixture());
  f.put(set.tasks[0].ground_truth_query, "   \n");
  const auto checks = validate_ground_truth(set, JoernClient(BackendConfig::fixture("unused"), f));
  EXPECT_FALSE(checks[0].passed);
  EXPECT_EQ(checks[0].reason, "empty result");
}

// Loading, ground-truth validation and leakage together stay well under 5 s.
TEST(Gate, FullGateIsFast) {
  const auto start = std::chrono::steady_clock::now();
  const auto set = load_benchmark(shipped_benchmark());
  JoernClient joern(BackendConfig::fixture(shipped_fixture()));
  const auto checks = validate_ground_truth(set, joern);
  const auto leaks = leakage_check(set, shipped_prompt_files());
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_TRUE(leaks.empty());
  EXPECT_TRUE(std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; }));
}

// compile(reference spec) and the hand-written ground truth print the same
// thing for every task.
TEST(Oracle, ReferenceSpecsMatchGroundTruth) {
  const auto set = load_benchmark(shipped_benchmark());
  const auto specs = load_reference_specs(test::source_path("data/benchmark/reference_specs.json"));
  JoernClient joern(BackendConfig::fixture(shipped_fixture()));
  ASSERT_EQ(specs.size(), set.tasks.size());
  for (const auto& t : set.tasks) {
    SCOPED_TRACE(t.id);
    ASSERT_TRUE(specs.contains(t.id));
    const auto gt = joern.execute(t.ground_truth_query);
    const auto compiled = joern.execute(compile(specs.at(t.id)).text);
    ASSERT_TRUE(gt.ok);
    ASSERT_TRUE(compiled.ok) << compiled.error_message.value_or("");
    EXPECT_EQ(compiled.normalized_output, gt.normalized_output);
  }
}

TEST(Oracle, InvalidReferenceSpecsNamed) {
  test::TempDir dir;
  test::write_file(dir.file("specs.json"),
                   R"({"specs": {"S01": {"query_type": "method_query", "output_columns": ["name"]}}})");
  try {
    load_reference_specs(dir.file("specs.json"));
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("S01"), std::string::npos);
  }
}
