#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace cpgql {

/// Strips `val resN: <Type> = ` REPL prefixes at line starts, collapses every
/// whitespace run to one space and trims. Idempotent; never lengthens input.
std::string normalize(std::string_view raw);

enum class ExecutionErrorKind { none, connection_failure, timeout, query_error, fixture_miss };

std::string_view to_string(ExecutionErrorKind k);

struct ExecutionResult {
  bool ok = false;
  std::string raw_output;
  std::string normalized_output;
  std::optional<std::string> error_message;
  ExecutionErrorKind error_kind = ExecutionErrorKind::none;
  std::chrono::milliseconds latency{0};

  /// Connection failures and timeouts are the environment's fault, not the query's.
  bool is_transport_failure() const {
    return error_kind == ExecutionErrorKind::connection_failure || error_kind == ExecutionErrorKind::timeout;
  }
};

enum class BackendMode { live, fixture };

struct BackendConfig {
  BackendMode mode = BackendMode::fixture;
  std::optional<std::string> endpoint;      // e.g. http://localhost:8080
  std::string query_path = "/query-sync";   // appended to endpoint in live mode
  std::chrono::milliseconds timeout{30'000};
  std::optional<std::string> fixture_path;

  static BackendConfig fixture(std::string path);
  static BackendConfig live(std::string endpoint);

  /// Empty when consistent; otherwise the violated requirement.
  std::optional<std::string> check() const;
};

/// Map from normalize(query) to the raw output Joern printed for it.
class Fixture {
 public:
  Fixture() = default;
  explicit Fixture(std::map<std::string, std::string> entries);

  static Fixture load(const std::string& path);  // throws std::runtime_error
  void save(const std::string& path) const;

  /// Keys are normalized on insertion.
  void put(std::string_view query, std::string raw_output);
  const std::string* find(std::string_view query) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Executes CPGQL against one backend. Queries to a live server are
/// serialized; fixture lookups are read-only.
class JoernClient {
 public:
  /// Throws std::invalid_argument for an inconsistent config and
  /// std::runtime_error if the fixture file cannot be read.
  explicit JoernClient(BackendConfig config);
  JoernClient(BackendConfig config, Fixture fixture);

  /// Never throws; every failure is encoded in the result.
  ExecutionResult execute(std::string_view query) const;

  const BackendConfig& config() const { return config_; }

 private:
  ExecutionResult execute_live(std::string_view query) const;
  ExecutionResult execute_fixture(std::string_view query) const;

  BackendConfig config_;
  std::shared_ptr<const Fixture> fixture_;
  mutable std::mutex live_mutex_;
};

/// One-shot convenience wrapper around JoernClient.
ExecutionResult execute(std::string_view query, const BackendConfig& config);

}  // namespace cpgql
