#include "cpgql/trial_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cpgql {

using json = nlohmann::json;

nlohmann::ordered_json to_json(const TrialRecord& r, bool include_wall_time) {
  nlohmann::ordered_json j;
  j["format"] = kTrialFormat;
  j["task_id"] = r.task_id;
  j["approach"] = to_string(r.approach);
  j["model_id"] = r.model_id;
  j["seed"] = r.seed;

  const auto& o = r.outcome;
  nlohmann::ordered_json oj;
  oj["status"] = to_string(o.status);
  oj["attempts"] = o.attempts;
  oj["steps"] = o.steps;
  oj["tool_calls"] = o.tool_calls;
  if (o.final_output) oj["final_output"] = *o.final_output;
  if (o.generated_query) oj["generated_query"] = *o.generated_query;
  if (o.failure_detail) oj["failure_detail"] = *o.failure_detail;
  j["outcome"] = std::move(oj);

  j["usage"] = to_json(r.usage);
  auto transcript = nlohmann::ordered_json::array();
  for (const auto& m : r.transcript) transcript.push_back(to_json(m));
  j["transcript"] = std::move(transcript);
  if (include_wall_time) j["wall_time_ms"] = r.wall_time.count();
  return j;
}

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw std::runtime_error(std::string("trial record: missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error(std::string("trial record: bad type for '") + key + "'");
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return field<std::string>(j, key);
}

}  // namespace

TrialRecord trial_record_from_json(const json& j) {
  if (!j.is_object()) throw std::runtime_error("trial record: not an object");
  if (field<std::string>(j, "format") != kTrialFormat)
    throw std::runtime_error("trial record: unsupported format '" + j["format"].get<std::string>() + "'");
  TrialRecord r;
  r.task_id = field<std::string>(j, "task_id");
  const auto approach = field<std::string>(j, "approach");
  if (auto a = approach_from_string(approach)) r.approach = *a;
  else throw std::runtime_error("trial record: unknown approach '" + approach + "'");
  r.model_id = field<std::string>(j, "model_id");
  r.seed = field<std::int64_t>(j, "seed");

  const json& oj = field<json>(j, "outcome");
  const auto status = field<std::string>(oj, "status");
  if (auto s = trial_status_from_string(status)) r.outcome.status = *s;
  else throw std::runtime_error("trial record: unknown status '" + status + "'");
  r.outcome.attempts = field<int>(oj, "attempts");
  r.outcome.steps = field<int>(oj, "steps");
  r.outcome.tool_calls = field<int>(oj, "tool_calls");
  r.outcome.final_output = opt_string(oj, "final_output");
  r.outcome.generated_query = opt_string(oj, "generated_query");
  r.outcome.failure_detail = opt_string(oj, "failure_detail");

  r.usage = usage_from_json(field<json>(j, "usage"));
  for (const auto& m : field<json>(j, "transcript")) r.transcript.push_back(chat_message_from_json(m));
  if (j.contains("wall_time_ms")) r.wall_time = std::chrono::milliseconds(field<std::int64_t>(j, "wall_time_ms"));
  return r;
}

TrialKey key_of(const TrialRecord& r) { return {r.approach, r.model_id, r.task_id, r.seed}; }

void write_trial_line(std::ostream& out, const TrialRecord& r) { out << to_json(r).dump() << '\n'; }

std::vector<TrialRecord> read_trial_records(std::istream& in) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("line " + std::to_string(lineno) + ": not valid JSON");
    try {
      out.push_back(trial_record_from_json(j));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TrialRecord> read_trial_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trial records " + path);
  return read_trial_records(in);
}

}  // namespace cpgql
