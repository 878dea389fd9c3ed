#include "cpgql/joern_client.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "http_util.hpp"

namespace cpgql {

using json = nlohmann::json;

std::string_view to_string(ExecutionErrorKind k) {
  switch (k) {
    case ExecutionErrorKind::none: return "none";
    case ExecutionErrorKind::connection_failure: return "connection_failure";
    case ExecutionErrorKind::timeout: return "timeout";
    case ExecutionErrorKind::query_error: return "query_error";
    case ExecutionErrorKind::fixture_miss: return "fixture_miss";
  }
  return "?";
}

BackendConfig BackendConfig::fixture(std::string path) {
  BackendConfig c;
  c.mode = BackendMode::fixture;
  c.fixture_path = std::move(path);
  return c;
}

BackendConfig BackendConfig::live(std::string endpoint) {
  BackendConfig c;
  c.mode = BackendMode::live;
  c.endpoint = std::move(endpoint);
  return c;
}

std::optional<std::string> BackendConfig::check() const {
  if (mode == BackendMode::live && !endpoint) return "live mode requires an endpoint";
  if (mode == BackendMode::fixture && !fixture_path) return "fixture mode requires a fixture path";
  if (timeout.count() <= 0) return "timeout must be positive";
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Fixture::Fixture(std::map<std::string, std::string> entries) {
  for (auto& [k, v] : entries) put(k, std::move(v));
}

Fixture Fixture::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::runtime_error("fixture file " + path + " is not a JSON object");
  Fixture f;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw std::runtime_error("fixture entry for '" + key + "' is not a string");
    f.put(key, value.get<std::string>());
  }
  return f;
}

void Fixture::save(const std::string& path) const {
  json doc = json::object();
  for (const auto& [k, v] : entries_) doc[k] = v;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write fixture file " + path);
  out << doc.dump(2) << '\n';
}

void Fixture::put(std::string_view query, std::string raw_output) {
  entries_[normalize(query)] = std::move(raw_output);
}

const std::string* Fixture::find(std::string_view query) const {
  auto it = entries_.find(normalize(query));
  return it == entries_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------

namespace {

ExecutionResult make_result(std::string raw, std::optional<std::string> error, ExecutionErrorKind kind) {
  ExecutionResult r;
  r.ok = !error.has_value();
  r.normalized_output = normalize(raw);
  r.raw_output = std::move(raw);
  r.error_message = std::move(error);
  r.error_kind = r.ok ? ExecutionErrorKind::none : kind;
  return r;
}

// The REPL reports compile and runtime errors on stdout; these line starts mark them.
std::optional<std::string> repl_error(const std::string& stdout_text) {
  std::istringstream in(stdout_text);
  std::string line;
  while (std::getline(in, line)) {
    for (std::string_view marker : {"-- [E", "-- Error", "error:", "java.lang.", "Exception in"}) {
      if (line.rfind(marker, 0) == 0) return stdout_text;
    }
  }
  return std::nullopt;
}

}  // namespace

JoernClient::JoernClient(BackendConfig config) : config_(std::move(config)) {
  if (auto problem = config_.check()) throw std::invalid_argument(*problem);
  if (config_.mode == BackendMode::fixture)
    fixture_ = std::make_shared<const Fixture>(Fixture::load(*config_.fixture_path));
}

JoernClient::JoernClient(BackendConfig config, Fixture fixture) : config_(std::move(config)) {
  config_.mode = BackendMode::fixture;
  fixture_ = std::make_shared<const Fixture>(std::move(fixture));
}

ExecutionResult JoernClient::execute(std::string_view query) const {
  const auto start = std::chrono::steady_clock::now();
  ExecutionResult r;
  try {
    r = config_.mode == BackendMode::live ? execute_live(query) : execute_fixture(query);
  } catch (const std::exception& e) {
    r = make_result("", std::string("connection failure: ") + e.what(), ExecutionErrorKind::connection_failure);
  }
  r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return r;
}

ExecutionResult JoernClient::execute_fixture(std::string_view query) const {
  if (const std::string* raw = fixture_->find(query)) {
    if (auto err = repl_error(*raw)) return make_result(*raw, *err, ExecutionErrorKind::query_error);
    return make_result(*raw, std::nullopt, ExecutionErrorKind::none);
  }
  return make_result("", "fixture miss: no recorded output for this query", ExecutionErrorKind::fixture_miss);
}

ExecutionResult JoernClient::execute_live(std::string_view query) const {
  auto url = detail::split_url(*config_.endpoint);
  if (!url) return make_result("", "invalid endpoint URL " + *config_.endpoint, ExecutionErrorKind::connection_failure);

  std::lock_guard lock(live_mutex_);
  httplib::Client client(url->origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const json body{{"query", std::string(query)}};
  auto res = client.Post(detail::join_path(url->path, config_.query_path), body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
      return make_result("", "timeout: no response within " + std::to_string(config_.timeout.count()) + " ms",
                         ExecutionErrorKind::timeout);
    return make_result("", "connection failure: " + httplib::to_string(err), ExecutionErrorKind::connection_failure);
  }
  if (res->status != 200)
    return make_result(res->body, "server returned HTTP " + std::to_string(res->status),
                       ExecutionErrorKind::connection_failure);

  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object())
    return make_result(res->body, "server reply is not a JSON object", ExecutionErrorKind::connection_failure);
  const std::string out = reply.value("stdout", std::string());
  const bool success = reply.value("success", false);
  if (!success) {
    std::string msg = reply.value("stderr", std::string());
    if (msg.empty()) msg = out.empty() ? std::string("query failed") : out;
    return make_result(out, msg, ExecutionErrorKind::query_error);
  }
  if (auto err = repl_error(out)) return make_result(out, *err, ExecutionErrorKind::query_error);
  return make_result(out, std::nullopt, ExecutionErrorKind::none);
}

ExecutionResult execute(std::string_view query, const BackendConfig& config) {
  try {
    return JoernClient(config).execute(query);
  } catch (const std::exception& e) {
    const auto kind = config.mode == BackendMode::fixture ? ExecutionErrorKind::fixture_miss
                                                          : ExecutionErrorKind::connection_failure;
    ExecutionResult r;
    r.error_message = e.what();
    r.error_kind = kind;
    return r;
  }
}

}  // namespace cpgql
