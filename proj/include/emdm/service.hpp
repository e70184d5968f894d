#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "emdm/catalog.hpp"
#include "emdm/dialog.hpp"

namespace emdm {

inline constexpr int kApiVersion = 1;

/// A JSON response body with its HTTP status code.
struct ServiceResponse {
  int status = 200;
  std::string body;
};

struct ServiceOptions {
  std::chrono::seconds idle_timeout{30 * 60};
  std::size_t top_k = 5;
  /// Injectable clock for expiry tests.
  std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

/// Server-held dialog sessions over a set of named catalogs.
///
/// Request handlers take and return JSON text so they can be exercised
/// without a socket; `serve` binds them to HTTP routes:
///
///   GET    /v1/health
///   GET    /v1/catalogs
///   POST   /v1/sessions                  {catalog, strategy, mode?, theta?, policy?, seed?, top_k?}
///   GET    /v1/sessions/{id}/question
///   POST   /v1/sessions/{id}/answers     {value} | {value, confidence} | {candidates:[{value, confidence}]} | {unknown:true}
///   GET    /v1/sessions/{id}
///   DELETE /v1/sessions/{id}
///
/// Posts to one session are serialized: a post that finds the session busy
/// gets 409 instead of waiting.
class SessionService {
 public:
  explicit SessionService(ServiceOptions options = {});

  void add_catalog(std::string name, std::shared_ptr<const Catalog> catalog);
  /// Loads every .csv/.tsv file in `dir`, named by file stem. Returns the count.
  std::size_t load_catalog_dir(const std::filesystem::path& dir);

  ServiceResponse health() const;
  ServiceResponse list_catalogs() const;
  ServiceResponse create_session(std::string_view body);
  ServiceResponse post_answer(const std::string& id, std::string_view body);
  ServiceResponse get_question(const std::string& id);
  ServiceResponse get_state(const std::string& id);
  ServiceResponse delete_session(const std::string& id);

  /// Drops sessions idle past the timeout; returns how many were removed.
  std::size_t expire_idle();
  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    std::string catalog_name;
    std::shared_ptr<const Catalog> catalog;
    std::unique_ptr<DialogSession> dialog;
    std::size_t top_k = 5;
    std::chrono::steady_clock::time_point last_access;
    std::mutex busy;
  };

  std::shared_ptr<Session> find_live(const std::string& id);
  std::string new_session_id();

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Catalog>> catalogs_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_;
};

/// Blocks serving HTTP on host:port until the process is stopped.
void serve(SessionService& service, const std::string& host, int port);

}  // namespace emdm
