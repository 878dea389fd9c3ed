#include "cpgql/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

namespace cpgql {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::optional<std::vector<std::string>> list_elements(std::string_view text) {
  text = trim(text);
  std::size_t i = 0;
  while (i < text.size() && is_ident_char(text[i])) ++i;
  if (i == 0 || i >= text.size() || text[i] != '(' || text.back() != ')') return std::nullopt;
  if (std::isdigit(static_cast<unsigned char>(text[0]))) return std::nullopt;

  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  bool in_quote = false;
  for (std::size_t k = i + 1; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quote) {
      current += c;
      if (c == '\\' && k + 1 < text.size()) current += text[++k];
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') {
      in_quote = true;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      if (depth == 0) {
        // Only the final character may close the outer list.
        if (k != text.size() - 1) return std::nullopt;
        break;
      }
      --depth;
    } else if (c == ',' && depth == 0) {
      out.emplace_back(trim(current));
      current.clear();
      continue;
    }
    current += c;
  }
  if (in_quote || depth != 0) return std::nullopt;
  const auto last = trim(current);
  if (!last.empty() || !out.empty()) out.emplace_back(last);
  return out;
}

bool outputs_match(std::string_view a, std::string_view b) {
  const std::string na = normalize(a), nb = normalize(b);
  if (na == nb) return true;
  auto la = list_elements(na), lb = list_elements(nb);
  if (!la || !lb) return false;
  // The list constructor name is not compared: List(...) and Vector(...) print the same elements.
  std::sort(la->begin(), la->end());
  std::sort(lb->begin(), lb->end());
  return *la == *lb;
}

std::set<std::string> quoted_strings(std::string_view text) {
  std::set<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '"') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    bool closed = false;
    while (j < text.size()) {
      if (text[j] == '\\' && j + 1 < text.size()) {
        j += 2;
        continue;
      }
      if (text[j] == '"') {
        closed = true;
        break;
      }
      ++j;
    }
    if (!closed) break;
    out.emplace(text.substr(i + 1, j - i - 1));
    i = j + 1;
  }
  return out;
}

MatchVerdict judge_output(const TrialRecord& record, const Task& task, std::string_view ground_truth_output) {
  MatchVerdict v;
  const auto& o = record.outcome;
  if (o.status == TrialStatus::success && o.final_output) {
    v.result_match = outputs_match(*o.final_output, ground_truth_output);
    v.relaxed_match = v.result_match || quoted_strings(*o.final_output) == quoted_strings(ground_truth_output);
  }
  if (record.approach != ApproachId::A3_agentic)
    v.exact_match = o.generated_query && *o.generated_query == task.ground_truth_query;
  return v;
}

MatchVerdict judge_trial(const TrialRecord& record, const Task& task, const JoernClient& joern) {
  const ExecutionResult gt = joern.execute(task.ground_truth_query);
  if (!gt.ok)
    throw VerdictError("ground truth for " + task.id + " failed: " + std::string(to_string(gt.error_kind)) + ": " +
                       gt.error_message.value_or(""));
  return judge_output(record, task, gt.normalized_output);
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

double percentage(std::size_t num, std::size_t den) {
  if (den == 0) return 0.0;
  // Integer rounding avoids binary-fraction surprises at the .x5 boundary.
  const std::size_t tenths = (2000 * num + den) / (2 * den);
  return static_cast<double>(tenths) / 10.0;
}

std::optional<FiveNumberSummary> five_number_summary(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = static_cast<double>(v.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
  };
  return FiveNumberSummary{v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

bool execution_succeeded(const TrialRecord& r) { return r.outcome.status == TrialStatus::success; }

namespace {

bool excluded(const TrialRecord& r) { return r.outcome.status == TrialStatus::fail_infrastructure; }

void check_parallel(const std::vector<TrialRecord>& records, const std::vector<MatchVerdict>& verdicts) {
  if (records.size() != verdicts.size()) throw std::invalid_argument("records and verdicts differ in length");
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

std::vector<CellAggregate> aggregate_cells(const std::vector<TrialRecord>& records,
                                           const std::vector<MatchVerdict>& verdicts) {
  check_parallel(records, verdicts);
  struct Acc {
    CellAggregate cell;
    double attempts = 0, steps = 0, tool_calls = 0;
    std::vector<double> tokens;
  };
  std::map<std::pair<std::string, ApproachId>, Acc> cells;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& v = verdicts[i];
    Acc& acc = cells[{r.model_id, r.approach}];
    acc.cell.model_id = r.model_id;
    acc.cell.approach = r.approach;
    if (excluded(r)) {
      ++acc.cell.infrastructure_failures;
      continue;
    }
    ++acc.cell.trials;
    acc.cell.result_matches += v.result_match;
    acc.cell.relaxed_matches += v.relaxed_match;
    acc.cell.exec_successes += execution_succeeded(r);
    if (r.approach != ApproachId::A3_agentic)
      acc.cell.exact_matches = acc.cell.exact_matches.value_or(0) + (v.exact_match.value_or(false) ? 1 : 0);
    acc.attempts += r.outcome.attempts;
    acc.steps += r.outcome.steps;
    acc.tool_calls += r.outcome.tool_calls;
    acc.tokens.push_back(static_cast<double>(r.usage.total()));
  }

  std::vector<CellAggregate> out;
  for (auto& [_, acc] : cells) {
    CellAggregate c = std::move(acc.cell);
    const auto n = c.trials;
    c.result_match_rate = percentage(c.result_matches, n);
    c.relaxed_match_rate = percentage(c.relaxed_matches, n);
    c.exec_success_rate = percentage(c.exec_successes, n);
    if (c.approach != ApproachId::A3_agentic) {
      c.exact_matches = c.exact_matches.value_or(0);
      c.exact_match_rate = percentage(*c.exact_matches, n);
    }
    if (n > 0) {
      c.mean_attempts = round2(acc.attempts / static_cast<double>(n));
      if (c.approach == ApproachId::A3_agentic) {
        c.mean_steps = round1(acc.steps / static_cast<double>(n));
        c.mean_tool_calls = round1(acc.tool_calls / static_cast<double>(n));
      }
    }
    c.token_stats = five_number_summary(std::move(acc.tokens));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<TierRow> aggregate_tiers(const std::vector<TrialRecord>& records, const std::vector<MatchVerdict>& verdicts,
                                     const BenchmarkSet& benchmark) {
  check_parallel(records, verdicts);
  // (model, approach) -> tier -> {matches, trials}
  std::map<std::pair<std::string, ApproachId>, std::map<Tier, std::pair<std::size_t, std::size_t>>> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const Task* task = benchmark.find(r.task_id);
    if (!task) throw std::invalid_argument("trial for unknown task " + r.task_id);
    auto& per_tier = counts[{r.model_id, r.approach}];
    auto& slot = per_tier[task->tier];
    if (excluded(r)) continue;
    slot.first += verdicts[i].result_match;
    ++slot.second;
  }
  std::vector<TierRow> out;
  for (const auto& [key, per_tier] : counts) {
    std::size_t all_m = 0, all_n = 0;
    for (Tier t : kAllTiers) {
      auto it = per_tier.find(t);
      const auto [m, n] = it == per_tier.end() ? std::pair<std::size_t, std::size_t>{0, 0} : it->second;
      out.push_back({key.first, key.second, t, m, n, percentage(m, n)});
      all_m += m;
      all_n += n;
    }
    out.push_back({key.first, key.second, std::nullopt, all_m, all_n, percentage(all_m, all_n)});
  }
  return out;
}

std::string_view to_string(SetRelation r) {
  switch (r) {
    case SetRelation::equal: return "equal";
    case SetRelation::strict_subset: return "strict subset";
    case SetRelation::strict_superset: return "strict superset";
    case SetRelation::incomparable: return "incomparable";
  }
  return "?";
}

SetRelation compare_sets(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a == b) return SetRelation::equal;
  if (std::includes(b.begin(), b.end(), a.begin(), a.end())) return SetRelation::strict_subset;
  if (std::includes(a.begin(), a.end(), b.begin(), b.end())) return SetRelation::strict_superset;
  return SetRelation::incomparable;
}

std::string_view tally_glyph(std::size_t solved, std::size_t reps) {
  if (solved == 0) return "—";
  if (solved >= reps) return "✓";
  return "•";
}

std::vector<CoverageReport> coverage_analysis(const std::vector<TrialRecord>& records,
                                              const std::vector<MatchVerdict>& verdicts,
                                              const BenchmarkSet& benchmark) {
  check_parallel(records, verdicts);
  std::map<std::string, CoverageReport> by_model;
  std::map<std::string, std::map<std::string, TaskTally>> tallies;  // model -> task -> tally
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const Task* task = benchmark.find(r.task_id);
    if (!task) throw std::invalid_argument("trial for unknown task " + r.task_id);
    CoverageReport& rep = by_model[r.model_id];
    rep.model_id = r.model_id;
    rep.solved[r.approach];  // approach is present even if it solves nothing
    TaskTally& t = tallies[r.model_id][r.task_id];
    t.task_id = task->id;
    t.tier = task->tier;
    if (excluded(r)) continue;
    ++t.reps[r.approach];
    if (verdicts[i].result_match) {
      ++t.solved[r.approach];
      rep.solved[r.approach].insert(r.task_id);
    }
  }

  std::vector<CoverageReport> out;
  for (auto& [model, rep] : by_model) {
    std::vector<ApproachId> present;
    for (const auto& [a, _] : rep.solved) present.push_back(a);
    for (std::size_t i = 0; i < present.size(); ++i)
      for (std::size_t j = i + 1; j < present.size(); ++j)
        rep.relations.push_back(
            {present[i], present[j], compare_sets(rep.solved[present[i]], rep.solved[present[j]])});
    for (const auto& task : benchmark.tasks) {
      TaskTally t;
      auto it = tallies[model].find(task.id);
      if (it != tallies[model].end()) t = it->second;
      t.task_id = task.id;
      t.tier = task.tier;
      for (ApproachId a : present) {
        t.solved[a];
        t.reps[a];
      }
      rep.tallies.push_back(std::move(t));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

AggregateReport aggregate(const std::vector<TrialRecord>& records, const std::vector<MatchVerdict>& verdicts,
                          const BenchmarkSet& benchmark) {
  AggregateReport report;
  report.cells = aggregate_cells(records, verdicts);
  report.tiers = aggregate_tiers(records, verdicts, benchmark);
  report.coverage = coverage_analysis(records, verdicts, benchmark);
  return report;
}

double compound_success(double p, double steps) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("per-step accuracy must lie in [0, 1]");
  if (!(steps >= 0.0) || std::isinf(steps)) throw std::domain_error("steps must be a finite non-negative number");
  if (steps == 0.0) return 1.0;
  return std::pow(p, steps);
}

}  // namespace cpgql
