#include "cpgql/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace cpgql {

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::markdown: return "markdown";
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
  }
  return "?";
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  for (ReportFormat f : {ReportFormat::markdown, ReportFormat::csv, ReportFormat::json})
    if (to_string(f) == s) return f;
  if (s == "md") return ReportFormat::markdown;
  return std::nullopt;
}

namespace {

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

// Integral values print without a fraction; interpolated quartiles keep one decimal.
std::string tokens(double x) {
  if (x == std::floor(x)) return fixed(x, 0);
  return fixed(x, 1);
}

std::string tier_label(Tier t) {
  switch (t) {
    case Tier::structural: return "Structural";
    case Tier::data_flow: return "Data flow";
    case Tier::composite: return "Composite";
  }
  return "?";
}

const CellAggregate* find_cell(const AggregateReport& r, const std::string& model, ApproachId a) {
  for (const auto& c : r.cells)
    if (c.model_id == model && c.approach == a) return &c;
  return nullptr;
}

const TierRow* find_tier(const AggregateReport& r, const std::string& model, ApproachId a, std::optional<Tier> t) {
  for (const auto& row : r.tiers)
    if (row.model_id == model && row.approach == a && row.tier == t) return &row;
  return nullptr;
}

std::vector<std::string> models_of(const AggregateReport& r) {
  std::vector<std::string> out;
  for (const auto& c : r.cells)
    if (out.empty() || out.back() != c.model_id) out.push_back(c.model_id);
  return out;
}

std::string rate_or_na(const CellAggregate* c, double rate) {
  if (!c) return "—";
  if (c->trials == 0) return "n/a";
  return fixed(rate, 1);
}

void markdown_overview(std::ostream& out, const AggregateReport& r, const std::vector<std::string>& models) {
  out << "## Result match and execution success (%)\n\n";
  out << "| Model | A1 Res. | A1 Exec. | A2 Res. | A2 Exec. | A3 Res. | A3 Exec. |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& m : models) {
    out << "| " << m;
    for (ApproachId a : kAllApproaches) {
      const CellAggregate* c = find_cell(r, m, a);
      out << " | " << rate_or_na(c, c ? c->result_match_rate : 0) << " | "
          << rate_or_na(c, c ? c->exec_success_rate : 0);
    }
    out << " |\n";
  }
  out << "\nInfrastructure failures are excluded from every denominator.\n\n";
}

void markdown_details(std::ostream& out, const AggregateReport& r) {
  out << "## Per-cell details\n\n";
  out << "| Model | Approach | Trials | Infra. failures | Exact (%) | Relaxed (%) | Mean attempts | Mean steps "
         "| Mean tool calls | Tokens min | Q1 | Median | Q3 | Max |\n";
  out << "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& c : r.cells) {
    out << "| " << c.model_id << " | " << short_name(c.approach) << " | " << c.trials << " | "
        << c.infrastructure_failures << " | "
        << (c.exact_match_rate ? rate_or_na(&c, *c.exact_match_rate) : std::string("—")) << " | "
        << rate_or_na(&c, c.relaxed_match_rate) << " | " << (c.trials ? fixed(c.mean_attempts, 2) : "n/a") << " | "
        << (c.mean_steps ? fixed(*c.mean_steps, 1) : "—") << " | "
        << (c.mean_tool_calls ? fixed(*c.mean_tool_calls, 1) : "—");
    if (c.token_stats) {
      const auto& s = *c.token_stats;
      for (double v : {s.min, s.q1, s.median, s.q3, s.max}) out << " | " << tokens(v);
    } else {
      for (int i = 0; i < 5; ++i) out << " | —";
    }
    out << " |\n";
  }
  out << "\n";
}

void markdown_tiers(std::ostream& out, const AggregateReport& r, const std::string& model) {
  out << "## Result match by tier: " << model << "\n\n";
  out << "| Tier | A1 # | A1 of | A1 % | A2 # | A2 of | A2 % | A3 # | A3 of | A3 % |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  std::vector<std::optional<Tier>> rows(kAllTiers.begin(), kAllTiers.end());
  rows.push_back(std::nullopt);
  for (const auto& t : rows) {
    out << "| " << (t ? tier_label(*t) : std::string("**All**"));
    for (ApproachId a : kAllApproaches) {
      const TierRow* row = find_tier(r, model, a, t);
      if (!row) out << " | — | — | —";
      else
        out << " | " << row->matches << " | " << row->trials << " | "
            << (row->trials ? fixed(row->rate, 1) : std::string("n/a"));
    }
    out << " |\n";
  }
  out << "\n";
}

void markdown_coverage(std::ostream& out, const CoverageReport& cov) {
  out << "## Per-task results: " << cov.model_id << "\n\n";
  out << "✓ = solved in every repetition; • = in some; — = in none.\n\n";
  out << "| Tier | Task | A1 | A2 | A3 |\n";
  out << "|---|---|:-:|:-:|:-:|\n";
  for (const auto& t : cov.tallies) {
    out << "| " << tier_label(t.tier) << " | " << t.task_id;
    for (ApproachId a : kAllApproaches) {
      auto s = t.solved.find(a);
      auto n = t.reps.find(a);
      if (s == t.solved.end()) out << " | ";
      else out << " | " << tally_glyph(s->second, n->second) << " " << s->second << "/" << n->second;
    }
    out << " |\n";
  }
  out << "\nTasks solved at least once:";
  bool first = true;
  for (const auto& [a, tasks] : cov.solved) {
    out << (first ? " " : ", ") << short_name(a) << " " << tasks.size();
    first = false;
  }
  out << ".\n\n";
  for (const auto& rel : cov.relations)
    out << "- solved(" << short_name(rel.a) << ") vs solved(" << short_name(rel.b) << "): " << to_string(rel.relation)
        << "\n";
  out << "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string emit_markdown(const AggregateReport& r) {
  std::ostringstream out;
  out << "# CPGQL benchmark report\n\n";
  if (r.empty()) {
    out << "No trial records.\n";
    return out.str();
  }
  const auto models = models_of(r);
  markdown_overview(out, r, models);
  markdown_details(out, r);
  for (const auto& m : models) markdown_tiers(out, r, m);
  for (const auto& cov : r.coverage) markdown_coverage(out, cov);
  return out.str();
}

std::string emit_csv(const AggregateReport& r) {
  std::ostringstream out;
  out << "model_id,approach,trials,infrastructure_failures,result_matches,result_match_rate,exec_successes,"
         "exec_success_rate,exact_matches,exact_match_rate,relaxed_matches,relaxed_match_rate,mean_attempts,"
         "mean_steps,mean_tool_calls,tokens_min,tokens_q1,tokens_median,tokens_q3,tokens_max\n";
  for (const auto& c : r.cells) {
    out << csv_field(c.model_id) << ',' << to_string(c.approach) << ',' << c.trials << ','
        << c.infrastructure_failures << ',' << c.result_matches << ',' << fixed(c.result_match_rate, 1) << ','
        << c.exec_successes << ',' << fixed(c.exec_success_rate, 1) << ','
        << (c.exact_matches ? std::to_string(*c.exact_matches) : "") << ','
        << (c.exact_match_rate ? fixed(*c.exact_match_rate, 1) : "") << ',' << c.relaxed_matches << ','
        << fixed(c.relaxed_match_rate, 1) << ',' << fixed(c.mean_attempts, 2) << ','
        << (c.mean_steps ? fixed(*c.mean_steps, 1) : "") << ','
        << (c.mean_tool_calls ? fixed(*c.mean_tool_calls, 1) : "");
    if (c.token_stats) {
      const auto& s = *c.token_stats;
      for (double v : {s.min, s.q1, s.median, s.q3, s.max}) out << ',' << tokens(v);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json five_json(const std::optional<FiveNumberSummary>& s) {
  if (!s) return nullptr;
  return {{"min", s->min}, {"q1", s->q1}, {"median", s->median}, {"q3", s->q3}, {"max", s->max}};
}

template <class T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const AggregateReport& r) {
  using oj = nlohmann::ordered_json;
  oj doc;
  doc["format"] = "cpgql-report/1";
  oj cells = oj::array();
  for (const auto& c : r.cells) {
    oj j;
    j["model_id"] = c.model_id;
    j["approach"] = to_string(c.approach);
    j["trials"] = c.trials;
    j["infrastructure_failures"] = c.infrastructure_failures;
    j["result_matches"] = c.result_matches;
    j["result_match_rate"] = c.result_match_rate;
    j["exec_successes"] = c.exec_successes;
    j["exec_success_rate"] = c.exec_success_rate;
    j["exact_matches"] = opt(c.exact_matches);
    j["exact_match_rate"] = opt(c.exact_match_rate);
    j["relaxed_matches"] = c.relaxed_matches;
    j["relaxed_match_rate"] = c.relaxed_match_rate;
    j["mean_attempts"] = c.mean_attempts;
    j["mean_steps"] = opt(c.mean_steps);
    j["mean_tool_calls"] = opt(c.mean_tool_calls);
    j["token_stats"] = five_json(c.token_stats);
    cells.push_back(std::move(j));
  }
  doc["cells"] = std::move(cells);

  oj tiers = oj::array();
  for (const auto& t : r.tiers)
    tiers.push_back({{"model_id", t.model_id},
                     {"approach", to_string(t.approach)},
                     {"tier", t.tier ? oj(to_string(*t.tier)) : oj("all")},
                     {"matches", t.matches},
                     {"trials", t.trials},
                     {"rate", t.rate}});
  doc["tiers"] = std::move(tiers);

  oj coverage = oj::array();
  for (const auto& c : r.coverage) {
    oj j;
    j["model_id"] = c.model_id;
    oj solved = oj::object();
    for (const auto& [a, tasks] : c.solved) solved[std::string(to_string(a))] = tasks;
    j["solved"] = std::move(solved);
    oj rels = oj::array();
    for (const auto& rel : c.relations)
      rels.push_back({{"a", to_string(rel.a)}, {"b", to_string(rel.b)}, {"relation", to_string(rel.relation)}});
    j["relations"] = std::move(rels);
    oj tallies = oj::array();
    for (const auto& t : c.tallies) {
      oj tj;
      tj["task_id"] = t.task_id;
      tj["tier"] = to_string(t.tier);
      for (const auto& [a, n] : t.solved) {
        const auto reps = t.reps.at(a);
        tj[std::string(to_string(a))] = {{"solved", n}, {"reps", reps}, {"glyph", tally_glyph(n, reps)}};
      }
      tallies.push_back(std::move(tj));
    }
    j["tallies"] = std::move(tallies);
    coverage.push_back(std::move(j));
  }
  doc["coverage"] = std::move(coverage);
  return doc;
}

std::string emit_report(const AggregateReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return emit_markdown(report);
    case ReportFormat::csv: return emit_csv(report);
    case ReportFormat::json: return to_json(report).dump(2) + "\n";
  }
  return {};
}

}  // namespace cpgql
