#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "refsearch/store.hpp"

namespace refsearch {

enum class StageStatus { Pending, Running, Done, Failed };

std::string to_string(StageStatus status);

/// Stage names in execution order. Detectors run first so that the commit
/// stage knows which hashes it has to resolve.
const std::vector<std::string>& job_stage_names();

struct StageState {
  std::string name;
  StageStatus status = StageStatus::Pending;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  std::string detail;
};

struct JobCounts {
  std::size_t commits_seen = 0;
  std::size_t records_parsed = 0;
  std::size_t cases_stored = 0;
  std::size_t cases_skipped_duplicate = 0;
  std::size_t records_rejected = 0;
};

struct IngestJob {
  std::string id;
  std::string repository_url;
  std::string created_at;
  std::vector<StageState> stages;
  JobCounts counts;
  /// First few rejection reasons.
  std::vector<std::string> rejections;

  /// failed if any stage failed, done when all are, pending before the
  /// first stage starts, running otherwise.
  StageStatus status() const;
  const StageState* failed_stage() const;
  StageState& stage(const std::string& name);
};

nlohmann::json to_json(const IngestJob& job);
nlohmann::json to_json(const JobCounts& counts);
IngestJob job_from_json(const nlohmann::json& json);

struct DetectorInput {
  std::string tool;  // RefactoringMiner or RefDiff
  std::optional<std::filesystem::path> file;
  /// Shell command printing detector JSON; `{repo}` becomes the quoted
  /// repository path.
  std::optional<std::string> command;
};

struct JobRequest {
  std::string repository_url;
  std::vector<DetectorInput> detectors;
  std::optional<std::filesystem::path> commits_jsonl;
  std::optional<std::filesystem::path> clone_path;

  /// Problems with the request; empty when it can run.
  std::vector<std::string> problems() const;
};

/// {"repositoryUrl", "detectorInputs":[{"tool","file"|"command"}],
///  "commitSource":{"commitsJsonl"|"clonePath"}}. Throws std::invalid_argument.
JobRequest job_request_from_json(const nlohmann::json& json);
nlohmann::json to_json(const JobRequest& request);

/// Job bookkeeping. With a log path every state change is appended as one
/// JSON line, and the newest state of each job is reloaded on construction.
class JobRegistry {
 public:
  explicit JobRegistry(std::optional<std::filesystem::path> log_path = std::nullopt);

  IngestJob create(const JobRequest& request);
  void update(const IngestJob& job);
  std::optional<IngestJob> get(const std::string& id) const;
  /// Newest first.
  std::vector<IngestJob> list() const;

 private:
  void append(const IngestJob& job);

  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> log_path_;
  std::map<std::string, IngestJob> jobs_;
  std::vector<std::string> order_;
  std::size_t next_ = 1;
};

inline constexpr std::size_t kStoreBatchSize = 1000;

/// Runs every stage of `job_id` (created by `registry` from `request`)
/// against `store`, publishing progress through the registry after each
/// transition. Returns the final job state.
IngestJob run_job(const JobRequest& request, Store& store, JobRegistry& registry, const std::string& job_id);

/// Creates and runs a job synchronously.
IngestJob run_job(const JobRequest& request, Store& store, JobRegistry& registry);

/// Runs jobs on background threads.
class JobRunner {
 public:
  JobRunner(Store& store, JobRegistry& registry) : store_(store), registry_(registry) {}
  ~JobRunner();
  JobRunner(const JobRunner&) = delete;
  JobRunner& operator=(const JobRunner&) = delete;

  /// Registers the job and starts it; returns the pending job.
  IngestJob submit(const JobRequest& request);
  void wait_all();

 private:
  Store& store_;
  JobRegistry& registry_;
  std::mutex mutex_;
  std::vector<std::thread> threads_;
};

}  // namespace refsearch
