#include "refsearch/jobs.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "refsearch/ingest.hpp"
#include "refsearch/process.hpp"

namespace refsearch {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxRejectionsKept = 50;

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  return format_utc_timestamp(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

StageStatus status_from_string(const std::string& s) {
  if (s == "pending") return StageStatus::Pending;
  if (s == "running") return StageStatus::Running;
  if (s == "done") return StageStatus::Done;
  if (s == "failed") return StageStatus::Failed;
  throw std::invalid_argument("unknown stage status '" + s + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

std::string tail(const std::string& text, std::size_t max) {
  return text.size() <= max ? text : "..." + text.substr(text.size() - max);
}

}  // namespace

std::string to_string(StageStatus status) {
  switch (status) {
    case StageStatus::Pending:
      return "pending";
    case StageStatus::Running:
      return "running";
    case StageStatus::Done:
      return "done";
    case StageStatus::Failed:
      return "failed";
  }
  return "pending";
}

const std::vector<std::string>& job_stage_names() {
  static const std::vector<std::string> names{"run-detectors", "fetch-commits", "convert", "store", "index"};
  return names;
}

StageStatus IngestJob::status() const {
  bool all_done = true;
  bool any_started = false;
  for (const auto& s : stages) {
    if (s.status == StageStatus::Failed) return StageStatus::Failed;
    if (s.status != StageStatus::Done) all_done = false;
    if (s.status != StageStatus::Pending) any_started = true;
  }
  if (all_done) return StageStatus::Done;
  return any_started ? StageStatus::Running : StageStatus::Pending;
}

const StageState* IngestJob::failed_stage() const {
  for (const auto& s : stages) {
    if (s.status == StageStatus::Failed) return &s;
  }
  return nullptr;
}

StageState& IngestJob::stage(const std::string& name) {
  for (auto& s : stages) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no stage " + name);
}

json to_json(const JobCounts& c) {
  return {{"commitsSeen", c.commits_seen},
          {"recordsParsed", c.records_parsed},
          {"casesStored", c.cases_stored},
          {"casesSkippedDuplicate", c.cases_skipped_duplicate},
          {"recordsRejected", c.records_rejected}};
}

json to_json(const IngestJob& job) {
  json stages = json::array();
  for (const auto& s : job.stages) {
    json st{{"name", s.name}, {"status", to_string(s.status)}, {"detail", s.detail}};
    st["startedAt"] = s.started_at ? json(*s.started_at) : json(nullptr);
    st["finishedAt"] = s.finished_at ? json(*s.finished_at) : json(nullptr);
    stages.push_back(std::move(st));
  }
  return {{"jobId", job.id},
          {"repositoryUrl", job.repository_url},
          {"createdAt", job.created_at},
          {"status", to_string(job.status())},
          {"stages", std::move(stages)},
          {"counts", to_json(job.counts)},
          {"rejections", job.rejections}};
}

IngestJob job_from_json(const json& j) {
  IngestJob job;
  job.id = j.at("jobId").get<std::string>();
  job.repository_url = j.at("repositoryUrl").get<std::string>();
  job.created_at = j.value("createdAt", "");
  for (const auto& st : j.at("stages")) {
    StageState s;
    s.name = st.at("name").get<std::string>();
    s.status = status_from_string(st.at("status").get<std::string>());
    if (st.contains("startedAt") && st["startedAt"].is_string()) s.started_at = st["startedAt"].get<std::string>();
    if (st.contains("finishedAt") && st["finishedAt"].is_string()) s.finished_at = st["finishedAt"].get<std::string>();
    s.detail = st.value("detail", "");
    job.stages.push_back(std::move(s));
  }
  const json& c = j.at("counts");
  job.counts.commits_seen = c.value("commitsSeen", std::size_t{0});
  job.counts.records_parsed = c.value("recordsParsed", std::size_t{0});
  job.counts.cases_stored = c.value("casesStored", std::size_t{0});
  job.counts.cases_skipped_duplicate = c.value("casesSkippedDuplicate", std::size_t{0});
  job.counts.records_rejected = c.value("recordsRejected", std::size_t{0});
  if (j.contains("rejections")) job.rejections = j["rejections"].get<std::vector<std::string>>();
  return job;
}

// ---------------------------------------------------------------------------

std::vector<std::string> JobRequest::problems() const {
  std::vector<std::string> out;
  if (repository_url.empty()) out.emplace_back("repositoryUrl is required");
  if (detectors.empty()) out.emplace_back("at least one detector input is required");
  for (const auto& d : detectors) {
    if (!canonical_tool(d.tool)) out.push_back("unknown detector '" + d.tool + "'");
    if (d.file.has_value() == d.command.has_value()) {
      out.push_back("detector input for '" + d.tool + "' needs exactly one of file or command");
    }
  }
  if (commits_jsonl && clone_path) out.emplace_back("give either a commits JSONL file or a clone path, not both");
  return out;
}

JobRequest job_request_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("job request must be a JSON object");
  JobRequest r;
  auto text = [](const json& obj, const char* key) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw std::invalid_argument(std::string("\"") + key + "\" must be a string");
    return it->get<std::string>();
  };
  r.repository_url = text(j, "repositoryUrl").value_or("");
  if (auto it = j.find("detectorInputs"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw std::invalid_argument("\"detectorInputs\" must be an array");
    for (const auto& d : *it) {
      if (!d.is_object()) throw std::invalid_argument("detector input must be an object");
      DetectorInput in;
      in.tool = text(d, "tool").value_or("");
      if (auto f = text(d, "file")) in.file = *f;
      in.command = text(d, "command");
      r.detectors.push_back(std::move(in));
    }
  }
  if (auto it = j.find("commitSource"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw std::invalid_argument("\"commitSource\" must be an object");
    if (auto f = text(*it, "commitsJsonl")) r.commits_jsonl = *f;
    if (auto p = text(*it, "clonePath")) r.clone_path = *p;
  }
  return r;
}

json to_json(const JobRequest& r) {
  json detectors = json::array();
  for (const auto& d : r.detectors) {
    json in{{"tool", d.tool}};
    if (d.file) in["file"] = d.file->string();
    if (d.command) in["command"] = *d.command;
    detectors.push_back(std::move(in));
  }
  json source = json::object();
  if (r.commits_jsonl) source["commitsJsonl"] = r.commits_jsonl->string();
  if (r.clone_path) source["clonePath"] = r.clone_path->string();
  return {{"repositoryUrl", r.repository_url}, {"detectorInputs", std::move(detectors)}, {"commitSource", source}};
}

// ---------------------------------------------------------------------------

JobRegistry::JobRegistry(std::optional<std::filesystem::path> log_path) : log_path_(std::move(log_path)) {
  if (!log_path_) return;
  std::ifstream in(*log_path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    IngestJob job;
    try {
      job = job_from_json(json::parse(line));
    } catch (const std::exception&) {
      continue;  // torn last line
    }
    if (jobs_.count(job.id) == 0) order_.push_back(job.id);
    unsigned long n = 0;
    if (std::sscanf(job.id.c_str(), "job-%lu", &n) == 1) next_ = std::max<std::size_t>(next_, n + 1);
    jobs_[job.id] = std::move(job);
  }
  // A job that was queued or running when the process died never finishes.
  for (auto& [id, job] : jobs_) {
    const StageStatus status = job.status();
    if (status != StageStatus::Pending && status != StageStatus::Running) continue;
    for (auto& s : job.stages) {
      if (s.status == StageStatus::Running || s.status == StageStatus::Pending) {
        s.status = StageStatus::Failed;
        s.detail = "interrupted";
        break;
      }
    }
  }
}

void JobRegistry::append(const IngestJob& job) {
  if (!log_path_) return;
  std::ofstream out(*log_path_, std::ios::app);
  out << to_json(job).dump() << '\n';
}

IngestJob JobRegistry::create(const JobRequest& request) {
  std::lock_guard lock(mutex_);
  IngestJob job;
  char id[32];
  std::snprintf(id, sizeof id, "job-%06zu", next_++);
  job.id = id;
  job.repository_url = normalize_repository_url(request.repository_url);
  job.created_at = now_utc();
  for (const auto& name : job_stage_names()) job.stages.push_back(StageState{name, StageStatus::Pending, {}, {}, {}});
  jobs_[job.id] = job;
  order_.push_back(job.id);
  append(job);
  return job;
}

void JobRegistry::update(const IngestJob& job) {
  std::lock_guard lock(mutex_);
  if (jobs_.count(job.id) == 0) order_.push_back(job.id);
  jobs_[job.id] = job;
  append(job);
}

std::optional<IngestJob> JobRegistry::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<IngestJob> JobRegistry::list() const {
  std::lock_guard lock(mutex_);
  std::vector<IngestJob> out;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) out.push_back(jobs_.at(*it));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct StageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void keep_rejections(IngestJob& job, const std::vector<std::string>& reasons) {
  for (const auto& r : reasons) {
    if (job.rejections.size() >= kMaxRejectionsKept) break;
    job.rejections.push_back(r);
  }
}

}  // namespace

IngestJob run_job(const JobRequest& request, Store& store, JobRegistry& registry, const std::string& job_id) {
  auto current = registry.get(job_id);
  if (!current) throw std::invalid_argument("unknown job " + job_id);
  IngestJob job = *current;

  std::vector<DetectorRecord> records;
  CommitMap commits;
  ConvertResult converted;

  // Runs one stage; returns false once the stage failed.
  auto run_stage = [&](const std::string& name, auto&& body) {
    StageState& st = job.stage(name);
    st.status = StageStatus::Running;
    st.started_at = now_utc();
    registry.update(job);
    try {
      st.detail = body();
      st.status = StageStatus::Done;
    } catch (const std::exception& e) {
      st.detail = e.what();
      st.status = StageStatus::Failed;
    }
    st.finished_at = now_utc();
    registry.update(job);
    return st.status == StageStatus::Done;
  };

  if (auto problems = request.problems(); !problems.empty()) {
    run_stage("run-detectors", [&]() -> std::string { throw StageFailure(problems.front()); });
    return job;
  }

  const bool ok =
      run_stage("run-detectors",
                [&] {
                  std::set<std::string> seen;
                  std::string detail;
                  for (const auto& input : request.detectors) {
                    std::string text;
                    if (input.file) {
                      text = read_file(*input.file);
                    } else {
                      const std::string repo =
                          request.clone_path ? request.clone_path->string() : request.repository_url;
                      const std::string cmd = replace_all(*input.command, "{repo}", shell_quote(repo));
                      ProcessResult r = run_shell(cmd);
                      if (r.exit_code != 0) {
                        throw StageFailure(input.tool + " command exited with " + std::to_string(r.exit_code) +
                                           ": " + tail(r.err, 2000));
                      }
                      text = std::move(r.out);
                    }
                    ParsedDetectorOutput parsed = parse_detector_output(input.tool, text);
                    seen.insert(parsed.commits.begin(), parsed.commits.end());
                    job.counts.records_parsed += parsed.records.size() + parsed.rejected;
                    job.counts.records_rejected += parsed.rejected;
                    keep_rejections(job, parsed.rejections);
                    if (!detail.empty()) detail += ", ";
                    detail += std::to_string(parsed.records.size()) + " records from " +
                              canonical_tool(input.tool).value_or(input.tool);
                    for (auto& r : parsed.records) records.push_back(std::move(r));
                  }
                  job.counts.commits_seen = seen.size();
                  return detail;
                }) &&
      run_stage("fetch-commits",
                [&] {
                  if (request.commits_jsonl) {
                    commits = read_commits_jsonl(*request.commits_jsonl);
                  } else if (request.clone_path) {
                    commits = read_git_history(*request.clone_path);
                  } else {
                    throw StageFailure("no commit source: give a commits JSONL file or a clone path");
                  }
                  std::set<std::string> missing;
                  for (const auto& r : records) {
                    if (commits.count(r.commit_sha1) == 0) missing.insert(r.commit_sha1);
                  }
                  if (!missing.empty()) {
                    std::string list;
                    for (const auto& sha1 : missing) list += (list.empty() ? "" : ", ") + sha1;
                    throw StageFailure("missing metadata for " + std::to_string(missing.size()) +
                                       " commit(s): " + list);
                  }
                  return std::to_string(commits.size()) + " commits";
                }) &&
      run_stage("convert",
                [&] {
                  converted = convert(records, commits, request.repository_url);
                  records.clear();
                  job.counts.records_rejected += converted.rejected;
                  job.counts.cases_skipped_duplicate += converted.duplicates;
                  keep_rejections(job, converted.rejections);
                  return std::to_string(converted.cases.size()) + " cases, " + std::to_string(converted.rejected) +
                         " rejected";
                }) &&
      run_stage("store",
                [&] {
                  const auto& cases = converted.cases;
                  for (std::size_t i = 0; i < cases.size(); i += kStoreBatchSize) {
                    const auto end = cases.begin() + static_cast<std::ptrdiff_t>(std::min(cases.size(), i + kStoreBatchSize));
                    PutResult put = store.put_cases(std::vector<RefactoringCase>(cases.begin() + static_cast<std::ptrdiff_t>(i), end));
                    job.counts.cases_stored += put.stored;
                    job.counts.cases_skipped_duplicate += put.skipped_duplicate;
                  }
                  return std::to_string(job.counts.cases_stored) + " stored, " +
                         std::to_string(job.counts.cases_skipped_duplicate) + " duplicates";
                }) &&
      run_stage("index", [&] {
        std::string detail;
        for (const auto& s : store.index_stats()) {
          if (!detail.empty()) detail += ", ";
          detail += s.name + ": " + std::to_string(s.entries) + " entries";
        }
        return detail;
      });
  (void)ok;
  return job;
}

IngestJob run_job(const JobRequest& request, Store& store, JobRegistry& registry) {
  IngestJob job = registry.create(request);
  return run_job(request, store, registry, job.id);
}

JobRunner::~JobRunner() { wait_all(); }

IngestJob JobRunner::submit(const JobRequest& request) {
  IngestJob job = registry_.create(request);
  std::lock_guard lock(mutex_);
  threads_.emplace_back([this, request, id = job.id] {
    try {
      run_job(request, store_, registry_, id);
    } catch (const std::exception&) {
      // run_job records stage failures itself; nothing else to report.
    }
  });
  return job;
}

void JobRunner::wait_all() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
}

}  // namespace refsearch
