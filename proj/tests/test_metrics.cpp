#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cpgql/metrics.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace cpgql;
using test::synthetic_by_tier;
using test::synthetic_solving;

namespace {

BenchmarkSet shipped() { return load_benchmark(test::source_path("data/benchmark/benchmark.json")); }

const TierRow& tier_row(const std::vector<TierRow>& rows, ApproachId a, std::optional<Tier> t) {
  auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.approach == a && r.tier == t; });
  if (it == rows.end()) throw std::runtime_error("no tier row");
  return *it;
}

}  // namespace

TEST(Percentage, RoundsToOneDecimal) {
  EXPECT_DOUBLE_EQ(percentage(35, 60), 58.3);
  EXPECT_DOUBLE_EQ(percentage(15, 21), 71.4);
  EXPECT_DOUBLE_EQ(percentage(8, 18), 44.4);
  EXPECT_DOUBLE_EQ(percentage(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(percentage(60, 60), 100.0);
  // 1/8 = 12.5 exactly; 1/16 = 6.25 rounds half up.
  EXPECT_DOUBLE_EQ(percentage(1, 16), 6.3);
  EXPECT_DOUBLE_EQ(percentage(2, 3), 66.7);
  EXPECT_DOUBLE_EQ(round1(4.75), 4.8);
  EXPECT_DOUBLE_EQ(round1(-0.25), -0.3);
}

TEST(CompoundSuccess, Values) {
  EXPECT_NEAR(compound_success(0.9, 4), 0.6561, 1e-12);
  EXPECT_NEAR(compound_success(0.9, 4.8) * 100, 59.0, 2.0);
  EXPECT_DOUBLE_EQ(compound_success(0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(compound_success(1.0, 10), 1.0);
  EXPECT_DOUBLE_EQ(compound_success(0.0, 3), 0.0);
  EXPECT_THROW(compound_success(1.1, 2), std::domain_error);
  EXPECT_THROW(compound_success(-0.1, 2), std::domain_error);
  EXPECT_THROW(compound_success(0.9, -1), std::domain_error);
  EXPECT_THROW(compound_success(std::nan(""), 1), std::domain_error);
  EXPECT_THROW(compound_success(0.9, INFINITY), std::domain_error);
}

TEST(ListElements, SplitsOnTopLevelCommas) {
  using V = std::vector<std::string>;
  EXPECT_EQ(list_elements("List(a, b, c)"), V({"a", "b", "c"}));
  EXPECT_EQ(list_elements("List()"), V{});
  EXPECT_EQ(list_elements("List((\"x\", 3), (\"y, z\", 4))"), V({"(\"x\", 3)", "(\"y, z\", 4)"}));
  EXPECT_EQ(list_elements("Vector(f(a, b), [c, d])"), V({"f(a, b)", "[c, d]"}));
  EXPECT_EQ(list_elements("List(\"a\\\"),\")"), V({"\"a\\\"),\""}));
  EXPECT_FALSE(list_elements("plain text"));
  EXPECT_FALSE(list_elements("(a, b)"));
  EXPECT_FALSE(list_elements("List(a) ++ List(b)"));
  EXPECT_FALSE(list_elements("List(\"open)"));
  EXPECT_FALSE(list_elements("1(a)"));
}

TEST(OutputsMatch, OrderInsensitiveAfterNormalization) {
  EXPECT_TRUE(outputs_match("List(\"a\", \"b\")", "val res3: List[String] = List(\"b\",\n  \"a\")"));
  EXPECT_TRUE(outputs_match("List(a, a, b)", "List(a, b, a)"));
  EXPECT_FALSE(outputs_match("List(a, a, b)", "List(a, b, b)"));
  EXPECT_FALSE(outputs_match("List(a, b)", "List(a, b, c)"));
  EXPECT_TRUE(outputs_match("table  text", "table text"));
  EXPECT_FALSE(outputs_match("table text", "other text"));
}

TEST(QuotedStrings, CollectsSegments) {
  EXPECT_EQ(quoted_strings("List((\"a\", 1), (\"b\\\"c\", 2), (\"a\", 3))"), (std::set<std::string>{"a", "b\\\"c"}));
  EXPECT_TRUE(quoted_strings("List(1, 2)").empty());
  EXPECT_EQ(quoted_strings("\"done\" \"unterminated"), std::set<std::string>{"done"});
}

TEST(JudgeOutput, Verdicts) {
  const Task task{"S01", Tier::structural, Project::commons_lang, "r", "cpg.method.name.l"};
  TrialRecord r;
  r.task_id = "S01";
  r.approach = ApproachId::A1_direct;
  r.outcome.status = TrialStatus::success;
  r.outcome.generated_query = "cpg.method.name.l";
  r.outcome.final_output = "List(\"b\", \"a\")";
  EXPECT_EQ(judge_output(r, task, "List(\"a\", \"b\")"), (MatchVerdict{true, true, true}));

  // Same strings, different line numbers: relaxed only.
  r.outcome.generated_query = "cpg.method.l";
  r.outcome.final_output = "List((\"a\", 1))";
  EXPECT_EQ(judge_output(r, task, "List((\"a\", 2))"), (MatchVerdict{false, true, false}));

  r.outcome.status = TrialStatus::fail_retries_exhausted;
  EXPECT_EQ(judge_output(r, task, "List((\"a\", 1))"), (MatchVerdict{false, false, false}));

  // Exact match is not defined for the agent.
  r.approach = ApproachId::A3_agentic;
  r.outcome.status = TrialStatus::success;
  r.outcome.generated_query.reset();
  EXPECT_EQ(judge_output(r, task, "List((\"a\", 1))"), (MatchVerdict{true, true, std::nullopt}));
}

TEST(JudgeTrial, GroundTruthFailureIsAnError) {
  const Task task{"S01", Tier::structural, Project::commons_lang, "r", "cpg.nothing.l"};
  JoernClient joern(BackendConfig::fixture("unused"), Fixture{});
  EXPECT_THROW(judge_trial(TrialRecord{}, task, joern), VerdictError);
}

TEST(Aggregate, SyntheticVerdictSets) {
  const auto bench = shipped();
  const auto c = synthetic_by_tier(bench, ApproachId::A2_structured, "m",
                                   {{Tier::structural, 12}, {Tier::data_flow, 15}, {Tier::composite, 8}});
  const auto cells = aggregate_cells(c.records, c.verdicts);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].trials, 60u);
  EXPECT_EQ(cells[0].result_matches, 35u);
  EXPECT_DOUBLE_EQ(cells[0].result_match_rate, 58.3);
  EXPECT_DOUBLE_EQ(cells[0].exec_success_rate, 100.0);
  EXPECT_EQ(cells[0].exact_match_rate, 58.3);
  EXPECT_FALSE(cells[0].mean_steps);
  EXPECT_DOUBLE_EQ(cells[0].mean_attempts, 1.0);

  const auto tiers = aggregate_tiers(c.records, c.verdicts, bench);
  ASSERT_EQ(tiers.size(), 4u);
  const auto& df = tier_row(tiers, ApproachId::A2_structured, Tier::data_flow);
  EXPECT_EQ(df.matches, 15u);
  EXPECT_EQ(df.trials, 21u);
  EXPECT_DOUBLE_EQ(df.rate, 71.4);
  const auto& comp = tier_row(tiers, ApproachId::A2_structured, Tier::composite);
  EXPECT_EQ(comp.trials, 18u);
  EXPECT_DOUBLE_EQ(comp.rate, 44.4);
  EXPECT_DOUBLE_EQ(tier_row(tiers, ApproachId::A2_structured, std::nullopt).rate, 58.3);
}

TEST(Aggregate, InfrastructureFailuresLeaveTheDenominator) {
  const auto bench = shipped();
  auto c = synthetic_by_tier(bench, ApproachId::A3_agentic, "m", {{Tier::structural, 21}});
  // Turn five misses into infrastructure failures.
  int turned = 0;
  for (std::size_t i = 0; i < c.records.size() && turned < 5; ++i)
    if (!c.verdicts[i].result_match) {
      c.records[i].outcome.status = TrialStatus::fail_infrastructure;
      ++turned;
    }
  const auto cells = aggregate_cells(c.records, c.verdicts);
  EXPECT_EQ(cells[0].trials, 55u);
  EXPECT_EQ(cells[0].infrastructure_failures, 5u);
  EXPECT_DOUBLE_EQ(cells[0].result_match_rate, percentage(21, 55));
  EXPECT_FALSE(cells[0].exact_match_rate);
  EXPECT_EQ(cells[0].mean_steps, 4.0);
  EXPECT_EQ(cells[0].mean_tool_calls, 3.0);
}

TEST(Aggregate, ExecutionFailuresStayInTheDenominator) {
  const auto bench = shipped();
  auto c = synthetic_by_tier(bench, ApproachId::A1_direct, "m", {{Tier::structural, 3}});
  c.records.back().outcome.status = TrialStatus::fail_retries_exhausted;
  const auto cells = aggregate_cells(c.records, c.verdicts);
  EXPECT_EQ(cells[0].trials, 60u);
  EXPECT_EQ(cells[0].exec_successes, 59u);
  EXPECT_DOUBLE_EQ(cells[0].exec_success_rate, 98.3);
}

TEST(Aggregate, IndependentOfRecordOrder) {
  const auto bench = shipped();
  auto c = synthetic_by_tier(bench, ApproachId::A1_direct, "m", {{Tier::structural, 5}, {Tier::composite, 2}});
  c.append(synthetic_by_tier(bench, ApproachId::A3_agentic, "n", {{Tier::data_flow, 9}}));
  const auto expected = aggregate(c.records, c.verdicts, bench);

  std::mt19937 rng(7);
  std::vector<std::size_t> order(c.records.size());
  for (int round = 0; round < 5; ++round) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    test::SyntheticCorpus shuffled;
    for (auto i : order) {
      shuffled.records.push_back(c.records[i]);
      shuffled.verdicts.push_back(c.verdicts[i]);
    }
    EXPECT_EQ(aggregate(shuffled.records, shuffled.verdicts, bench), expected);
  }
}

TEST(Aggregate, RejectsMismatchedInput) {
  const auto bench = shipped();
  auto c = synthetic_by_tier(bench, ApproachId::A1_direct, "m", {});
  c.verdicts.pop_back();
  EXPECT_THROW(aggregate_cells(c.records, c.verdicts), std::invalid_argument);
  c.verdicts.push_back({});
  c.records[0].task_id = "X99";
  EXPECT_THROW(aggregate_tiers(c.records, c.verdicts, bench), std::invalid_argument);
}

TEST(FiveNumberSummary, InclusiveQuartiles) {
  EXPECT_FALSE(five_number_summary({}));
  EXPECT_EQ(five_number_summary({5}), (FiveNumberSummary{5, 5, 5, 5, 5}));
  EXPECT_EQ(five_number_summary({4, 1, 3, 2, 5}), (FiveNumberSummary{1, 2, 3, 4, 5}));
  EXPECT_EQ(five_number_summary({1, 2, 3, 4}), (FiveNumberSummary{1, 1.75, 2.5, 3.25, 4}));
}

TEST(SetRelations, CompareAndName) {
  using S = std::set<std::string>;
  EXPECT_EQ(compare_sets(S{"a"}, S{"a"}), SetRelation::equal);
  EXPECT_EQ(compare_sets(S{}, S{}), SetRelation::equal);
  EXPECT_EQ(compare_sets(S{"a"}, S{"a", "b"}), SetRelation::strict_subset);
  EXPECT_EQ(compare_sets(S{}, S{"a"}), SetRelation::strict_subset);
  EXPECT_EQ(compare_sets(S{"a", "b"}, S{"b"}), SetRelation::strict_superset);
  EXPECT_EQ(compare_sets(S{"a"}, S{"b"}), SetRelation::incomparable);
  EXPECT_EQ(to_string(SetRelation::strict_subset), "strict subset");
  EXPECT_EQ(to_string(SetRelation::incomparable), "incomparable");
}

TEST(TallyGlyph, ThreeStates) {
  EXPECT_EQ(tally_glyph(3, 3), "✓");
  EXPECT_EQ(tally_glyph(1, 3), "•");
  EXPECT_EQ(tally_glyph(0, 3), "—");
  EXPECT_EQ(tally_glyph(0, 0), "—");
}

TEST(Coverage, StrictSubsetReported) {
  const auto bench = shipped();
  auto c = synthetic_solving(bench, ApproachId::A2_structured, "m", {"S01", "D02", "C03"});
  c.append(synthetic_solving(bench, ApproachId::A3_agentic, "m", {"S01", "C03"}));
  const auto cov = coverage_analysis(c.records, c.verdicts, bench);
  ASSERT_EQ(cov.size(), 1u);
  ASSERT_EQ(cov[0].relations.size(), 1u);
  EXPECT_EQ(cov[0].relations[0].a, ApproachId::A2_structured);
  EXPECT_EQ(cov[0].relations[0].b, ApproachId::A3_agentic);
  EXPECT_EQ(cov[0].relations[0].relation, SetRelation::strict_superset);
  EXPECT_EQ(compare_sets(cov[0].solved.at(ApproachId::A3_agentic), cov[0].solved.at(ApproachId::A2_structured)),
            SetRelation::strict_subset);
  ASSERT_EQ(cov[0].tallies.size(), 20u);
  EXPECT_EQ(cov[0].tallies[0].task_id, "S01");
  EXPECT_EQ(cov[0].tallies[0].solved.at(ApproachId::A3_agentic), 3u);
  EXPECT_EQ(cov[0].tallies[0].reps.at(ApproachId::A3_agentic), 3u);
}

TEST(Coverage, EqualSetsReported) {
  const auto bench = shipped();
  auto c = synthetic_solving(bench, ApproachId::A2_structured, "m", {"S02", "D05"});
  c.append(synthetic_solving(bench, ApproachId::A3_agentic, "m", {"S02", "D05"}));
  // One miss on a single seed does not change "solved at least once".
  for (std::size_t i = 0; i < c.records.size(); ++i)
    if (c.records[i].approach == ApproachId::A3_agentic && c.records[i].task_id == "D05" && c.records[i].seed == 43)
      c.verdicts[i] = test::synthetic_verdict(ApproachId::A3_agentic, false);
  const auto cov = coverage_analysis(c.records, c.verdicts, bench);
  EXPECT_EQ(cov[0].relations[0].relation, SetRelation::equal);
  const auto& d05 = *std::find_if(cov[0].tallies.begin(), cov[0].tallies.end(),
                                  [](const auto& t) { return t.task_id == "D05"; });
  EXPECT_EQ(d05.solved.at(ApproachId::A3_agentic), 2u);
  EXPECT_EQ(tally_glyph(d05.solved.at(ApproachId::A3_agentic), d05.reps.at(ApproachId::A3_agentic)), "•");
}

TEST(Coverage, InfrastructureFailuresDoNotCountAsRepetitions) {
  const auto bench = shipped();
  auto c = synthetic_solving(bench, ApproachId::A1_direct, "m", {"S01"});
  c.records[0].outcome.status = TrialStatus::fail_infrastructure;
  const auto cov = coverage_analysis(c.records, c.verdicts, bench);
  EXPECT_EQ(cov[0].tallies[0].reps.at(ApproachId::A1_direct), 2u);
  EXPECT_EQ(cov[0].tallies[0].solved.at(ApproachId::A1_direct), 2u);
  EXPECT_TRUE(cov[0].relations.empty());
}
