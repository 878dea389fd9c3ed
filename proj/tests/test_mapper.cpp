#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <regex>

#include "cpgql/mapper.hpp"
#include "spec_gen.hpp"
#include "test_support.hpp"

using namespace cpgql;
using nlohmann::json;

namespace {

struct ConformanceCase {
  std::string name;
  json spec;
  FlowProjection projection = FlowProjection::paths;
  std::string expected;
};

std::vector<ConformanceCase> load_conformance() {
  std::vector<ConformanceCase> out;
  const auto dir = std::filesystem::path(test::source_path("tests/conformance"));
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    const std::string suffix = ".case.json";
    if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    ConformanceCase c;
    c.name = file.substr(0, file.size() - suffix.size());
    json doc = json::parse(test::read_file(entry.path().string()));
    c.spec = doc.at("spec");
    if (doc.value("projection", "paths") == "reachable") c.projection = FlowProjection::reachable;
    c.expected = test::read_file((dir / (c.name + ".cpgql")).string());
    while (!c.expected.empty() && c.expected.back() == '\n') c.expected.pop_back();
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

QuerySpec spec_of(const json& doc) {
  auto r = validate_spec(doc);
  if (!r.ok()) throw std::runtime_error(format_errors(r.errors));
  return *r.spec;
}

}  // namespace

// One golden per case under tests/conformance. The suite as a whole must span
// every query type, endpoint kind and column, with and without limit.
TEST(MapperConformance, GoldenCases) {
  const auto cases = load_conformance();
  ASSERT_GE(cases.size(), 22u);
  std::set<QueryType> types;
  std::set<EndpointKind> kinds;
  std::set<OutputColumn> columns;
  bool with_limit = false, without_limit = false;

  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    const QuerySpec spec = spec_of(c.spec);
    EXPECT_EQ(compile(spec, c.projection).text, c.expected);
    types.insert(spec.query_type);
    for (const auto* ep : {&spec.source, &spec.sink})
      if (*ep) kinds.insert((*ep)->kind);
    if (!is_flow_query(spec.query_type) || c.projection == FlowProjection::reachable)
      columns.insert(spec.output_columns.begin(), spec.output_columns.end());
    (spec.limit ? with_limit : without_limit) = true;
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::seconds(1));
  EXPECT_EQ(types.size(), kAllQueryTypes.size());
  EXPECT_EQ(kinds.size(), kAllEndpointKinds.size());
  EXPECT_EQ(columns.size(), kAllOutputColumns.size());
  EXPECT_TRUE(with_limit && without_limit);
}

TEST(MapperConformance, ProcessOrderGolden) {
  auto r = parse_spec(test::read_file(test::source_path("tests/golden/processorder_flow.json")));
  ASSERT_TRUE(r.ok());
  std::string golden = test::read_file(test::source_path("tests/golden/processorder_flow.cpgql"));
  while (!golden.empty() && golden.back() == '\n') golden.pop_back();
  const CpgqlQuery q = compile(*r.spec);
  EXPECT_EQ(q.text, golden);
  EXPECT_EQ(q.text,
            "def source = cpg.method.name(\"processOrder\").parameter; "
            "def sink = cpg.call.name(\"execute\").argument; sink.reachableByFlows(source).p");
  EXPECT_EQ(q.spec_fingerprint, spec_fingerprint(*r.spec));
}

TEST(Mapper, IdentityFilterSelectsAllMethodNames) {
  auto q = compile(spec_of({{"query_type", "method_query"}, {"filter", {{"method_name", ".*"}}},
                            {"output_columns", {"name"}}}));
  EXPECT_EQ(q.text, "cpg.method.map(n => n.name).l");
}

TEST(Mapper, EveryQueryTypeHasOneTemplate) {
  std::map<QueryType, int> count;
  for (const auto& [name, t] : builtin_templates())
    if (name.find('.') == std::string::npos) ++count[t.query_type];
  for (auto qt : kAllQueryTypes) EXPECT_EQ(count[qt], 1) << to_string(qt);

  const json minimal_filter{{"method_name", "m"}};
  for (auto qt : kAllQueryTypes) {
    json doc{{"query_type", std::string(to_string(qt))}, {"output_columns", {"code"}}};
    if (qt != QueryType::data_flow) doc["filter"] = minimal_filter;
    if (is_flow_query(qt)) {
      doc["source"] = {{"kind", "call"}, {"name", "a"}};
      doc["sink"] = {{"kind", "call"}, {"name", "b"}};
    }
    const auto text = compile(spec_of(doc)).text;
    EXPECT_FALSE(text.empty());
    EXPECT_EQ(text.find("{{"), std::string::npos) << text;
  }
}

TEST(Mapper, FilterOrderIsCanonical) {
  auto a = compile(spec_of(json::parse(
      R"({"query_type":"method_query","filter":{"modifier":"public","annotation":"Deprecated","method_name":"get.*"},"output_columns":["name"]})")));
  auto b = compile(spec_of(json::parse(
      R"({"output_columns":["name"],"filter":{"method_name":"get.*","annotation":"Deprecated","modifier":"public"},"query_type":"method_query"})")));
  EXPECT_EQ(a.text, b.text);
}

TEST(Mapper, Deterministic) {
  test::SpecGenerator gen(99);
  for (int i = 0; i < 100; ++i) {
    const QuerySpec s = spec_of(gen.spec());
    EXPECT_EQ(compile(s), compile(s));
    EXPECT_EQ(compile(s, FlowProjection::reachable), compile(s, FlowProjection::reachable));
  }
}

// Any two serializations that parse to the same spec compile to the same text.
TEST(Mapper, CanonicalizationProperty) {
  test::SpecGenerator gen(20240611);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const json doc = gen.spec();
    const auto [a, b] = gen.two_renderings(doc);
    ASSERT_NE(a, b);
    auto ra = parse_spec(a);
    auto rb = parse_spec(b);
    ASSERT_TRUE(ra.ok()) << a << "\n" << format_errors(ra.errors);
    ASSERT_TRUE(rb.ok()) << b << "\n" << format_errors(rb.errors);
    ASSERT_EQ(*ra.spec, *rb.spec);
    if (compile(*ra.spec).text != compile(*rb.spec).text) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(EscapeIdentifier, Examples) {
  EXPECT_EQ(escape_identifier("processOrder"), "processOrder");
  EXPECT_EQ(escape_identifier("a.b$c"), "a\\.b\\$c");
  EXPECT_EQ(escape_identifier("\""), "\\\"");
  EXPECT_EQ(escape_identifier("f(x)[0]{1}|^+?*\\"), "f\\(x\\)\\[0\\]\\{1\\}\\|\\^\\+\\?\\*\\\\");
  EXPECT_THROW(escape_identifier("bad\nname"), IdentifierError);
  EXPECT_THROW(escape_identifier(std::string("nul\0x", 5)), IdentifierError);
}

TEST(EscapeIdentifier, IdempotentOnSafeInput) {
  for (const char* s : {"processOrder", "execute", "<init>", "snake_case_1", "ü"})
    EXPECT_EQ(escape_identifier(escape_identifier(s)), escape_identifier(s));
}

// The escaped pattern must match the literal name and nothing that differs
// from it only where a metacharacter stood.
TEST(EscapeIdentifier, MatchesExactlyTheLiteral) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"a.b$c", {"aXb$c", "a.b", "a.bc", "ab$c"}},
      {"x+", {"xx", "x"}},
      {"(a|b)", {"a", "b", "(a)"}},
      {"say \"hi\"", {"say hi", "say 'hi'"}},
      {"back\\slash", {"backslash", "back/slash"}},
  };
  for (const auto& [literal, others] : cases) {
    const std::regex re(escape_identifier(literal));
    EXPECT_TRUE(std::regex_match(literal, re)) << literal;
    for (const auto& o : others) EXPECT_FALSE(std::regex_match(o, re)) << literal << " vs " << o;
  }
}

TEST(ScalaLiteral, EscapesQuotesAndBackslashes) {
  EXPECT_EQ(scala_string_literal("plain"), "\"plain\"");
  EXPECT_EQ(scala_string_literal("a\"b\\c"), "\"a\\\"b\\\\c\"");
}

TEST(Templates, PlaceholderExtraction) {
  EXPECT_EQ(placeholders_in("cpg.method{{filter}}{{projection}}.x{{filter}}"),
            (std::set<std::string>{"filter", "projection"}));
  EXPECT_TRUE(placeholders_in("cpg.method.l").empty());
}

TEST(Templates, UnknownPlaceholderIsADefect) {
  std::string text;
  for (const auto& [name, t] : builtin_templates()) text += "[" + name + "]\n" + t.skeleton + "\n\n";
  EXPECT_NO_THROW(parse_templates(text));
  const auto pos = text.find("{{projection}}");
  ASSERT_NE(pos, std::string::npos);
  std::string broken = text;
  broken.replace(pos, 14, "{{projektion}}");
  EXPECT_THROW(parse_templates(broken), MapperDefect);
}

TEST(Templates, ShippedFileMatchesBuiltin) {
  const auto parsed = parse_templates(test::read_file(test::source_path("data/templates/cpgql_templates_v1.txt")));
  ASSERT_EQ(parsed.size(), builtin_templates().size());
  for (const auto& [name, t] : parsed) EXPECT_EQ(t.skeleton, builtin_templates().at(name).skeleton) << name;
}
