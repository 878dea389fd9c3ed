#include <gtest/gtest.h>

#include "cpgql/report.hpp"
#include "shipped.hpp"
#include "synthetic.hpp"

using namespace cpgql;

namespace {

BenchmarkSet shipped() { return load_benchmark(test::shipped_benchmark_path()); }

AggregateReport small_report() {
  const auto bench = shipped();
  auto c = test::synthetic_by_tier(bench, ApproachId::A1_direct, "m,1", {{Tier::structural, 4}});
  c.append(test::synthetic_by_tier(bench, ApproachId::A3_agentic, "m,1", {{Tier::data_flow, 2}}));
  return aggregate(c.records, c.verdicts, bench);
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(ReportFormat, Parsing) {
  EXPECT_EQ(report_format_from_string("markdown"), ReportFormat::markdown);
  EXPECT_EQ(report_format_from_string("md"), ReportFormat::markdown);
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::csv);
  EXPECT_EQ(report_format_from_string("json"), ReportFormat::json);
  EXPECT_FALSE(report_format_from_string("html"));
  EXPECT_FALSE(report_format_from_string(""));
}

TEST(Report, EmptyReport) {
  EXPECT_EQ(emit_report(AggregateReport{}, ReportFormat::markdown), "# CPGQL benchmark report\n\nNo trial records.\n");
  EXPECT_EQ(count_lines(emit_report(AggregateReport{}, ReportFormat::csv)), 1u);
  const auto j = nlohmann::json::parse(emit_report(AggregateReport{}, ReportFormat::json));
  EXPECT_TRUE(j["cells"].empty());
}

TEST(Report, MarkdownSections) {
  const auto md = emit_report(small_report(), ReportFormat::markdown);
  EXPECT_NE(md.find("| Model | A1 Res. | A1 Exec. | A2 Res. | A2 Exec. | A3 Res. | A3 Exec. |"), std::string::npos);
  // A2 never ran for this model.
  EXPECT_NE(md.find("| m,1 | 6.7 | 100.0 | — | — | 3.3 | 100.0 |"), std::string::npos);
  EXPECT_NE(md.find("## Result match by tier: m,1"), std::string::npos);
  EXPECT_NE(md.find("| Data flow | 0 | 21 | 0.0 | — | — | — | 2 | 21 | 9.5 |"), std::string::npos);
  EXPECT_NE(md.find("| Structural | S01 | ✓ 3/3 |  | — 0/3 |"), std::string::npos);
  EXPECT_NE(md.find("| Structural | S02 | • 1/3 |  | — 0/3 |"), std::string::npos);
  EXPECT_NE(md.find("- solved(A1) vs solved(A3): incomparable"), std::string::npos);
  EXPECT_NE(md.find("Tasks solved at least once: A1 2, A3 1."), std::string::npos);
}

TEST(Report, CsvOneRowPerCell) {
  const auto csv = emit_report(small_report(), ReportFormat::csv);
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_EQ(csv.rfind("model_id,approach,trials,", 0), 0u);
  // Model ids with commas are quoted; empty fields mark undefined metrics.
  EXPECT_NE(csv.find("\n\"m,1\",A1_direct,60,0,4,6.7,60,100.0,4,6.7,4,6.7,1.00,,,"), std::string::npos);
  EXPECT_NE(csv.find("\n\"m,1\",A3_agentic,60,0,2,3.3,60,100.0,,,2,3.3,1.00,4.0,3.0,"), std::string::npos);
}

TEST(Report, JsonCarriesEverything) {
  const auto report = small_report();
  const auto j = nlohmann::json::parse(emit_report(report, ReportFormat::json));
  EXPECT_EQ(j["format"], "cpgql-report/1");
  ASSERT_EQ(j["cells"].size(), 2u);
  EXPECT_EQ(j["cells"][0]["approach"], "A1_direct");
  EXPECT_EQ(j["cells"][1]["exact_match_rate"], nullptr);
  EXPECT_EQ(j["tiers"].size(), 8u);
  EXPECT_EQ(j["coverage"][0]["relations"][0]["relation"], "incomparable");
  EXPECT_EQ(j["coverage"][0]["tallies"][0]["A1_direct"]["glyph"], "✓");
}

TEST(Report, RenderingIsDeterministic) {
  for (ReportFormat f : {ReportFormat::markdown, ReportFormat::csv, ReportFormat::json})
    EXPECT_EQ(emit_report(small_report(), f), emit_report(small_report(), f));
}

// The full replay run renders to the checked-in report.
TEST(Report, ShippedReplayMatchesGolden) {
  test::TempDir dir;
  const auto records = dir.file("records.jsonl");
  std::ostringstream progress;
  execute_plan(test::replay_plan(records), progress);
  for (const std::string format : {"markdown", "csv"}) {
    SCOPED_TRACE(format);
    int code = -1;
    const auto text = test::report_text(test::replay_report(records, format), code);
    EXPECT_EQ(code, kExitOk);
    const auto golden = test::source_path(format == "markdown" ? "tests/golden/replay_report.md"
                                                               : "tests/golden/replay_report.csv");
    EXPECT_EQ(text, test::read_file(golden));
  }
}
