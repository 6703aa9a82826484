#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "autex/evaluation.hpp"
#include "autex/indexer.hpp"
#include "autex/store.hpp"

namespace httplib {
class Server;
}

namespace autex {

// JSON projections shared by the HTTP layer and the CLI.
nlohmann::json to_json(const ApdEntry& entry);
nlohmann::json to_json(const IndexReport& report);
nlohmann::json to_json(const ComparisonResult& result);
nlohmann::json to_json(const CorpusMetrics& metrics);
nlohmann::json to_json(const BatchResult& result);

struct ServiceConfig {
  std::filesystem::path store_root;
  std::size_t default_gap_bound = kDefaultGapBound;
};

struct JobStatus {
  int id = 0;
  bool done = false;
  std::vector<nlohmann::json> results;
};

/// Store-backed application layer behind the /v1 API.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  /// Registers every /v1 route on `server`.
  void mount(httplib::Server& server);

  /// Starts a batch over the current queue; returns the job id. With
  /// `wait` the batch runs on the calling thread.
  int start_batch(std::optional<std::size_t> gap_bound, bool wait);
  std::optional<JobStatus> job(int id) const;
  void wait_for_jobs();

  /// Snapshot of the in-memory state (for tests and diagnostics).
  StoreState state() const;

 private:
  void run_job(int id, std::vector<IndexRequest> requests, std::vector<BatchResult> early);

  ServiceConfig config_;
  Store store_;
  mutable std::shared_mutex state_mutex_;
  StoreState state_;

  mutable std::mutex jobs_mutex_;
  std::map<int, JobStatus> jobs_;
  std::vector<std::thread> workers_;
  int next_job_ = 1;
};

/// Binds and serves until the process is stopped.
void serve(Service& service, const std::string& host, int port);

}  // namespace autex
