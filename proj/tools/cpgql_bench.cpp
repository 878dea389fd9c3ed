// cpgql-bench: compile specs, validate the benchmark, run trials, report.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cpgql/commands.hpp"

#ifndef CPGQL_DATA_DIR
#define CPGQL_DATA_DIR "data"
#endif

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

const std::string kData = CPGQL_DATA_DIR;

struct JoernFlags {
  std::string fixture = kData + "/fixtures/joern_fixture.json";
  std::string endpoint;
  bool live = false;
  int timeout_ms = 30'000;

  void add(CLI::App* app) {
    app->add_option("--fixture", fixture, "Recorded Joern outputs (fixture backend)")->capture_default_str();
    app->add_flag("--live", live, "Query a running Joern server instead of the fixture");
    app->add_option("--joern-endpoint", endpoint, "Joern server URL (default: $CPGQL_JOERN_ENDPOINT)");
    app->add_option("--joern-timeout-ms", timeout_ms, "Per-query timeout")->capture_default_str();
  }

  cpgql::BackendConfig config() const {
    cpgql::BackendConfig c = live ? cpgql::BackendConfig::live(
                                        endpoint.empty() ? env_or("CPGQL_JOERN_ENDPOINT", "http://localhost:8080")
                                                         : endpoint)
                                  : cpgql::BackendConfig::fixture(fixture);
    c.timeout = std::chrono::milliseconds(timeout_ms);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language to CPGQL toolkit and benchmark harness"};
  app.require_subcommand(1);
  int code = cpgql::kExitOk;

  // compile
  auto* compile = app.add_subcommand("compile", "Compile a QuerySpec JSON file to CPGQL");
  std::string spec_path;
  std::string projection = "paths";
  compile->add_option("spec", spec_path, "QuerySpec JSON file")->required();
  compile->add_option("--projection", projection, "Flow projection for data_flow specs")
      ->check(CLI::IsMember({"paths", "reachable"}))
      ->capture_default_str();
  compile->callback([&] {
    code = cpgql::cmd_compile(spec_path,
                              projection == "reachable" ? cpgql::FlowProjection::reachable
                                                        : cpgql::FlowProjection::paths,
                              std::cout, std::cerr);
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Check the benchmark, its ground truth and prompt leakage");
  cpgql::ValidateOptions vopts;
  vopts.benchmark_path = kData + "/benchmark/benchmark.json";
  JoernFlags vjoern;
  std::string record_path;
  validate->add_option("--benchmark", vopts.benchmark_path, "Benchmark file")->capture_default_str();
  validate->add_option("--prompt", vopts.extra_prompt_files, "Additional prompt file to leak-check");
  validate->add_option("--record", record_path, "Save ground-truth outputs as a fixture file");
  vjoern.add(validate);
  validate->callback([&] {
    vopts.joern = vjoern.config();
    if (!record_path.empty()) vopts.record_fixture_path = record_path;
    code = cpgql::cmd_validate(vopts, std::cout, std::cerr);
  });

  // run
  auto* run = app.add_subcommand("run", "Run trials and append JSONL records");
  cpgql::RunPlan plan;
  plan.benchmark_path = kData + "/benchmark/benchmark.json";
  std::vector<std::string> approaches{"A1", "A2", "A3"};
  std::vector<std::string> models{"replay-model"};
  std::string llm_backend = "replay";
  std::string replay_path = kData + "/replay/replay_corpus.json";
  std::string llm_endpoint;
  double temperature = 0.0;
  JoernFlags rjoern;
  run->add_option("--approach", approaches, "A1, A2, A3 (or full names)")->capture_default_str();
  run->add_option("--model", models, "Model ids")->capture_default_str();
  run->add_option("--seed", plan.seeds, "Seeds")->capture_default_str();
  run->add_option("--task", plan.task_ids, "Restrict to these task ids");
  run->add_option("--benchmark", plan.benchmark_path, "Benchmark file")->capture_default_str();
  run->add_option("-o,--output", plan.output_path, "JSONL output (appended; existing trials are skipped)")
      ->required();
  run->add_option("--llm-backend", llm_backend, "replay or http")
      ->check(CLI::IsMember({"replay", "http"}))
      ->capture_default_str();
  run->add_option("--replay", replay_path, "Replay corpus for the replay backend")->capture_default_str();
  run->add_option("--llm-endpoint", llm_endpoint, "Chat-completions URL (default: $CPGQL_LLM_ENDPOINT)");
  run->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
  run->add_option("-j,--jobs", plan.jobs, "Concurrent trials (replay + fixture only)")->capture_default_str();
  run->add_option("--feedback-cap", plan.pipeline.error_feedback_cap, "Error text characters fed back to the model")
      ->capture_default_str();
  rjoern.add(run);
  run->callback([&] {
    for (const auto& a : approaches) {
      auto id = cpgql::approach_from_string(a);
      if (!id) {
        std::cerr << "error: unknown approach '" << a << "'\n";
        code = cpgql::kExitIo;
        return;
      }
      plan.approaches.push_back(*id);
    }
    plan.model_ids = models;
    plan.llm.temperature = temperature;
    if (llm_backend == "http") {
      plan.llm.backend = cpgql::LlmBackend::http;
      plan.llm.endpoint = llm_endpoint.empty() ? env_or("CPGQL_LLM_ENDPOINT", "") : llm_endpoint;
      if (plan.llm.endpoint->empty()) plan.llm.endpoint.reset();
    } else {
      plan.llm.backend = cpgql::LlmBackend::replay;
      plan.llm.replay_path = replay_path;
    }
    plan.joern = rjoern.config();
    code = cpgql::cmd_run(plan, std::cout, std::cerr);
  });

  // report
  auto* report = app.add_subcommand("report", "Judge trial records and render the metrics report");
  cpgql::ReportOptions ropts;
  ropts.benchmark_path = kData + "/benchmark/benchmark.json";
  JoernFlags pjoern;
  report->add_option("records", ropts.records_path, "JSONL trial records")->required();
  report->add_option("--benchmark", ropts.benchmark_path, "Benchmark file")->capture_default_str();
  report->add_option("--format", ropts.format, "markdown, csv or json")->capture_default_str();
  pjoern.add(report);
  report->callback([&] {
    ropts.joern = pjoern.config();
    code = cpgql::cmd_report(ropts, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cpgql::kExitOk : cpgql::kExitIo;
  }
  return code;
}
