#include "cpgql/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "cpgql/benchmark.hpp"
#include "cpgql/metrics.hpp"
#include "cpgql/report.hpp"
#include "cpgql/trial_io.hpp"

namespace cpgql {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int cmd_compile(const std::string& spec_path, FlowProjection projection, std::ostream& out, std::ostream& err) {
  const auto text = read_file(spec_path);
  if (!text) {
    err << "error: cannot read " << spec_path << "\n";
    return kExitIo;
  }
  const SpecParseResult parsed = parse_spec(*text);
  if (!parsed.ok()) {
    err << format_errors(parsed.errors);
    return kExitDomain;
  }
  out << compile(*parsed.spec, projection).text << "\n";
  return kExitOk;
}

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  if (!fs::exists(options.benchmark_path)) {
    err << "error: cannot read " << options.benchmark_path << "\n";
    return kExitIo;
  }
  std::vector<PromptFile> prompts = shipped_prompt_files();
  for (const auto& path : options.extra_prompt_files) {
    auto text = read_file(path);
    if (!text) {
      err << "error: cannot read prompt file " << path << "\n";
      return kExitIo;
    }
    prompts.push_back({path, std::move(*text)});
  }

  BenchmarkSet set;
  try {
    set = load_benchmark(options.benchmark_path);
  } catch (const BenchmarkError& e) {
    err << e.what() << "\n";
    return kExitDomain;
  }

  std::optional<JoernClient> joern;
  try {
    joern.emplace(options.joern);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  const auto checks = validate_ground_truth(set, *joern);
  std::size_t passed = 0;
  for (const auto& c : checks) {
    if (c.passed) {
      ++passed;
      out << c.task_id << " pass\n";
    } else {
      out << c.task_id << " FAIL " << c.reason << "\n";
    }
  }
  const auto leaks = leakage_check(set, prompts);
  for (const auto& l : leaks)
    out << "leak: task " << l.task_id << " " << to_string(l.kind) << " appears in " << l.file << "\n";
  out << "ground truth: " << passed << "/" << checks.size() << " pass; leakage findings: " << leaks.size() << "\n";

  if (options.record_fixture_path) {
    try {
      fixture_from_checks(set, checks).save(*options.record_fixture_path);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitIo;
    }
    out << "fixture written to " << *options.record_fixture_path << "\n";
  }
  return passed == checks.size() && leaks.empty() ? kExitOk : kExitDomain;
}

std::optional<std::string> RunPlan::check() const {
  if (approaches.empty()) return "at least one approach is required";
  if (model_ids.empty()) return "at least one model is required";
  if (seeds.empty()) return "at least one seed is required";
  if (benchmark_path.empty()) return "a benchmark path is required";
  if (output_path.empty()) return "an output path is required";
  if (jobs == 0) return "jobs must be at least 1";
  if (jobs > 1 && (llm.backend != LlmBackend::replay || joern.mode != BackendMode::fixture))
    return "parallel trials need the replay LLM backend and the fixture Joern backend";
  if (auto e = llm.check()) return e;
  if (auto e = joern.check()) return e;
  return std::nullopt;
}

RunSummary execute_plan(const RunPlan& plan, std::ostream& progress) {
  if (auto problem = plan.check()) throw std::invalid_argument(*problem);
  const BenchmarkSet set = load_benchmark(plan.benchmark_path);

  std::vector<const Task*> tasks;
  for (const auto& t : set.tasks)
    if (plan.task_ids.empty() || std::find(plan.task_ids.begin(), plan.task_ids.end(), t.id) != plan.task_ids.end())
      tasks.push_back(&t);
  for (const auto& id : plan.task_ids)
    if (!set.find(id)) throw std::invalid_argument("unknown task id " + id);
  std::sort(tasks.begin(), tasks.end(), [](const Task* a, const Task* b) { return a->id < b->id; });

  std::set<TrialKey> done;
  if (fs::exists(plan.output_path))
    for (const auto& r : read_trial_records(plan.output_path)) done.insert(key_of(r));

  std::shared_ptr<const ReplayScript> script;
  if (plan.llm.backend == LlmBackend::replay)
    script = std::make_shared<const ReplayScript>(ReplayScript::load(*plan.llm.replay_path));
  const JoernClient joern(plan.joern);

  struct Pending {
    ApproachId approach;
    std::string model;
    const Task* task;
    std::int64_t seed;
  };
  RunSummary summary;
  std::vector<Pending> pending;
  for (ApproachId a : plan.approaches)
    for (const auto& m : plan.model_ids)
      for (const Task* t : tasks)
        for (std::int64_t s : plan.seeds) {
          ++summary.planned;
          if (done.contains(TrialKey{a, m, t->id, s})) {
            ++summary.skipped;
            continue;
          }
          pending.push_back({a, m, t, s});
        }

  auto run_one = [&](const Pending& p) {
    LlmConfig cfg = plan.llm;
    cfg.model_id = p.model;
    cfg.seed = p.seed;
    const LlmClient base = script ? LlmClient(cfg, script) : LlmClient(cfg);
    const LlmClient llm = base.for_trial(replay_trial_id(to_string(p.approach), p.model, p.task->id, p.seed));
    return run_trial(p.approach, *p.task, llm, joern, plan.pipeline);
  };

  std::ofstream out(plan.output_path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + plan.output_path + " for appending");
  auto emit = [&](const TrialRecord& r) {
    write_trial_line(out, r);
    out.flush();
    if (!out) throw std::runtime_error("write to " + plan.output_path + " failed");
    ++summary.executed;
    ++summary.statuses[r.outcome.status];
    progress << short_name(r.approach) << " " << r.model_id << " " << r.task_id << " " << r.seed << " "
             << to_string(r.outcome.status) << "\n";
  };

  if (plan.jobs <= 1) {
    for (const auto& p : pending) emit(run_one(p));
    return summary;
  }
  // Bounded batches of concurrent trials, written back in plan order.
  for (std::size_t start = 0; start < pending.size(); start += plan.jobs) {
    const std::size_t end = std::min(pending.size(), start + plan.jobs);
    std::vector<std::future<TrialRecord>> batch;
    for (std::size_t i = start; i < end; ++i)
      batch.push_back(std::async(std::launch::async, run_one, std::cref(pending[i])));
    for (auto& f : batch) emit(f.get());
  }
  return summary;
}

int cmd_run(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  if (auto problem = plan.check()) {
    err << "error: " << *problem << "\n";
    return kExitIo;
  }
  if (!fs::exists(plan.benchmark_path)) {
    err << "error: cannot read " << plan.benchmark_path << "\n";
    return kExitIo;
  }
  try {
    const RunSummary s = execute_plan(plan, err);
    out << "planned " << s.planned << ", skipped " << s.skipped << ", executed " << s.executed << "\n";
    for (const auto& [status, n] : s.statuses) out << "  " << to_string(status) << ": " << n << "\n";
    return kExitOk;
  } catch (const BenchmarkError& e) {
    err << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  const auto format = report_format_from_string(options.format);
  if (!format) {
    err << "error: unknown format '" << options.format << "'\n"
        << "usage: cpgql-bench report RECORDS.jsonl [--format markdown|csv|json]\n";
    return kExitDomain;
  }
  std::vector<TrialRecord> records;
  try {
    records = read_trial_records(options.records_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }

  std::vector<MatchVerdict> verdicts;
  BenchmarkSet set;
  if (!records.empty()) {
    try {
      set = load_benchmark(options.benchmark_path);
      const JoernClient joern(options.joern);
      // The ground truth of each task is executed once.
      std::map<std::string, std::string> gt_outputs;
      for (const auto& r : records) {
        const Task* task = set.find(r.task_id);
        if (!task) throw std::invalid_argument("record for unknown task " + r.task_id);
        auto it = gt_outputs.find(task->id);
        if (it == gt_outputs.end()) {
          const ExecutionResult gt = joern.execute(task->ground_truth_query);
          if (!gt.ok)
            throw VerdictError("ground truth for " + task->id + " failed: " + gt.error_message.value_or(""));
          it = gt_outputs.emplace(task->id, gt.normalized_output).first;
        }
        verdicts.push_back(judge_output(r, *task, it->second));
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitDomain;
    }
  }
  out << emit_report(aggregate(records, verdicts, set), *format);
  return kExitOk;
}

}  // namespace cpgql
