#include "refsearch/cli.hpp"

#include <CLI11.hpp>
#include <pthread.h>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <optional>
#include <thread>

#include "refsearch/api.hpp"
#include "refsearch/bench.hpp"
#include "refsearch/ingest.hpp"
#include "refsearch/jobs.hpp"
#include "refsearch/store.hpp"
#include "refsearch/synth.hpp"

namespace refsearch {

using nlohmann::json;

std::string caret_diagnostic(const std::string& query, std::size_t offset, std::size_t length) {
  std::string out = "  " + query + "\n  " + std::string(std::min(offset, query.size()), ' ') + "^";
  if (length > 1) out += std::string(length - 1, '~');
  return out;
}

namespace {

constexpr const char* kDefaultDataDir = "refsearch-data";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::filesystem::path jobs_log(const std::filesystem::path& data_dir) { return data_dir / "jobs.jsonl"; }

Store open_store(const std::string& data_dir, bool read_only) {
  if (read_only && !std::filesystem::exists(data_dir)) return Store::in_memory();
  StoreOptions options;
  options.read_only = read_only;
  return Store::open(data_dir, options);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string clip(const std::string& s, std::size_t width) {
  return s.size() <= width ? s : s.substr(0, width - 3) + "...";
}

void print_table(const SearchPage& page, std::ostream& out) {
  const std::vector<std::string> headers{"REPOSITORY", "TOOL", "TYPE", "DESCRIPTION"};
  std::vector<std::array<std::string, 4>> rows;
  for (const auto& c : page.items) rows.push_back({c.repository, c.tool, c.type, clip(c.description, 100)});
  std::array<std::size_t, 3> width{};
  for (std::size_t i = 0; i < 3; ++i) width[i] = headers[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < 3; ++i) width[i] = std::max(width[i], r[i].size());
  }
  out << pad(headers[0], width[0]) << "  " << pad(headers[1], width[1]) << "  " << pad(headers[2], width[2]) << "  "
      << headers[3] << "\n";
  for (const auto& r : rows) {
    out << pad(r[0], width[0]) << "  " << pad(r[1], width[1]) << "  " << pad(r[2], width[2]) << "  " << r[3] << "\n";
  }
  if (page.items.empty()) {
    out << "(no results, total " << page.total << ")\n";
  } else {
    out << "(" << page.offset + 1 << "-" << page.offset + page.items.size() << " of " << page.total << ")\n";
  }
}

json job_summary(const IngestJob& job) {
  json out = to_json(job.counts);
  out["jobId"] = job.id;
  out["repositoryUrl"] = job.repository_url;
  out["status"] = to_string(job.status());
  json stages = json::array();
  for (const auto& s : job.stages) stages.push_back({{"name", s.name}, {"status", to_string(s.status)}, {"detail", s.detail}});
  out["stages"] = std::move(stages);
  if (!job.rejections.empty()) out["rejections"] = job.rejections;
  return out;
}

// Blocks SIGINT/SIGTERM in the calling thread (and threads it starts) and
// stops the server from a dedicated waiter thread.
class SignalStopper {
 public:
  explicit SignalStopper(ApiServer& server) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set_, &previous_);
    waiter_ = std::thread([this, &server] {
      int sig = 0;
      sigwait(&set_, &sig);
      server.stop();
    });
  }
  ~SignalStopper() {
    pthread_kill(waiter_.native_handle(), SIGUSR1);
    waiter_.join();
    pthread_sigmask(SIG_SETMASK, &previous_, nullptr);
  }

 private:
  sigset_t set_{};
  sigset_t previous_{};
  std::thread waiter_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search engine for refactoring cases", "refsearch"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  std::string data_dir = kDefaultDataDir;
  app.add_option("--data-dir", data_dir, "Store directory")->envname("REFSEARCH_DATA_DIR")->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest detector output for one repository");
  std::string repo;
  std::optional<std::string> rminer_json, refdiff_json, commits_jsonl, clone_path;
  std::vector<std::string> detector_cmds;
  ingest->add_option("--repo", repo, "Repository URL")->required()->envname("REFSEARCH_REPO");
  ingest->add_option("--rminer-json", rminer_json, "RefactoringMiner JSON export")->envname("REFSEARCH_RMINER_JSON");
  ingest->add_option("--refdiff-json", refdiff_json, "RefDiff JSON export")->envname("REFSEARCH_REFDIFF_JSON");
  ingest->add_option("--commits-jsonl", commits_jsonl, "Commit metadata, one JSON object per line")
      ->envname("REFSEARCH_COMMITS_JSONL");
  ingest->add_option("--clone-path", clone_path, "Local clone to read commit metadata from")
      ->envname("REFSEARCH_CLONE_PATH");
  ingest->add_option("--detector-cmd", detector_cmds, "<tool>=<shell command>; {repo} expands to the clone path")
      ->envname("REFSEARCH_DETECTOR_CMD");

  // search
  auto* search = app.add_subcommand("search", "Run a query against the store");
  std::string query;
  std::string limit = std::to_string(kDefaultPageSize);
  std::string offset = "0";
  std::string sort = "commit.date:desc";
  std::string format = "table";
  search->add_option("query", query, "Query; an empty string matches everything")->required();
  search->add_option("--limit", limit, "Page size (max 200)")->envname("REFSEARCH_LIMIT")->capture_default_str();
  search->add_option("--offset", offset, "Page offset")->envname("REFSEARCH_OFFSET")->capture_default_str();
  search->add_option("--sort", sort, "path:asc or path:desc")->envname("REFSEARCH_SORT")->capture_default_str();
  search->add_option("--format", format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->envname("REFSEARCH_FORMAT")
      ->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  ServerOptions server_options;
  std::optional<std::string> ui_dir, ui_origin;
  serve->add_option("--port", server_options.port, "Listen port")->envname("REFSEARCH_PORT")->capture_default_str();
  serve->add_option("--host", server_options.host, "Listen address")->envname("REFSEARCH_HOST")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Static UI bundle served at /")->envname("REFSEARCH_UI_DIR");
  serve->add_option("--ui-origin", ui_origin, "Origin allowed by CORS")->envname("REFSEARCH_UI_ORIGIN");

  // bench
  auto* bench = app.add_subcommand("bench", "Measure query latency");
  std::string queries_file;
  std::size_t repeat = 10;
  bench->add_option("--queries", queries_file, "One query per line, # comments")
      ->required()
      ->envname("REFSEARCH_QUERIES");
  bench->add_option("--repeat", repeat, "Timed runs per query")
      ->check(CLI::PositiveNumber)
      ->envname("REFSEARCH_REPEAT")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Print store statistics");

  auto* index = app.add_subcommand("index", "Index maintenance");
  index->require_subcommand(1);
  auto* rebuild = index->add_subcommand("rebuild", "Rebuild every secondary index");

  auto* export_cmd = app.add_subcommand("export", "Write the corpus as JSONL");
  std::string export_path;
  export_cmd->add_option("--out", export_path, "Output file")->required()->envname("REFSEARCH_OUT");

  auto* import_cmd = app.add_subcommand("import", "Load a JSONL corpus");
  std::string import_path;
  import_cmd->add_option("--in", import_path, "Input file")->required()->envname("REFSEARCH_IN");

  auto* generate = app.add_subcommand("generate", "Add a synthetic corpus to the store");
  SynthOptions synth;
  generate->add_option("--count", synth.count, "Number of cases")->envname("REFSEARCH_COUNT")->capture_default_str();
  generate->add_option("--seed", synth.seed, "Random seed")->envname("REFSEARCH_SEED")->capture_default_str();
  generate->add_option("--repositories", synth.repositories, "Number of repositories")
      ->check(CLI::PositiveNumber)
      ->envname("REFSEARCH_REPOSITORIES")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      JobRequest request;
      request.repository_url = repo;
      if (rminer_json) request.detectors.push_back({std::string(kRefactoringMiner), *rminer_json, std::nullopt});
      if (refdiff_json) request.detectors.push_back({std::string(kRefDiff), *refdiff_json, std::nullopt});
      for (const auto& spec : detector_cmds) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--detector-cmd expects <tool>=<command>, got '" + spec + "'");
        request.detectors.push_back({spec.substr(0, eq), std::nullopt, spec.substr(eq + 1)});
      }
      if (commits_jsonl) request.commits_jsonl = *commits_jsonl;
      if (clone_path) request.clone_path = *clone_path;
      if (auto problems = request.problems(); !problems.empty()) throw UsageError(problems.front());

      Store store = open_store(data_dir, false);
      JobRegistry registry(jobs_log(data_dir));
      IngestJob job = run_job(request, store, registry);
      out << job_summary(job).dump() << "\n";
      if (const StageState* failed = job.failed_stage()) {
        err << "stage " << failed->name << " failed: " << failed->detail << "\n";
        return kExitFailure;
      }
      return kExitOk;
    }

    if (search->parsed()) {
      SearchParams params{query, offset, limit, sort};
      auto built = build_search_request(params);
      if (auto* e = std::get_if<ApiError>(&built)) {
        if (e->code == "parse_error") {
          err << "parse error at offset " << e->offset.value_or(0) << ": " << e->message << "\n"
              << caret_diagnostic(query, e->offset.value_or(0), e->length.value_or(0)) << "\n";
        } else {
          err << "error: " << e->message << "\n";
        }
        return kExitUsage;
      }
      Store store = open_store(data_dir, true);
      SearchPage page = store.search(std::get<SearchRequest>(built));
      if (format == "json") {
        out << to_json(page).dump() << "\n";
      } else {
        print_table(page, out);
      }
      return kExitOk;
    }

    if (serve->parsed()) {
      server_options.ui_dir = ui_dir ? std::optional<std::filesystem::path>(*ui_dir) : std::nullopt;
      server_options.ui_origin = ui_origin;
      Store store = open_store(data_dir, false);
      JobRegistry registry(jobs_log(data_dir));
      JobRunner runner(store, registry);
      ApiService service(store, &registry, &runner);
      ApiServer server(service, server_options);
      int port = 0;
      try {
        port = server.bind();
      } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
      }
      err << "listening on http://" << server_options.host << ":" << port << "\n";
      {
        SignalStopper stopper(server);
        server.listen();
      }
      runner.wait_all();
      return kExitOk;
    }

    if (bench->parsed()) {
      std::ifstream in(queries_file);
      if (!in) throw std::runtime_error("cannot open " + queries_file);
      std::vector<BenchQuery> queries;
      try {
        queries = read_bench_queries(in);
      } catch (const BenchQueryError& e) {
        err << queries_file << ":" << e.line() << ": parse error at offset " << e.error().offset() << ": "
            << e.error().message() << "\n";
        return kExitUsage;
      }
      Store store = open_store(data_dir, true);
      out << to_json(run_bench(store, queries, repeat)).dump(2) << "\n";
      return kExitOk;
    }

    if (stats->parsed()) {
      Store store = open_store(data_dir, true);
      out << to_json(store.stats()).dump(2) << "\n";
      return kExitOk;
    }

    if (rebuild->parsed()) {
      Store store = open_store(data_dir, false);
      json body = json::array();
      for (const auto& s : store.rebuild_indexes()) {
        body.push_back({{"name", s.name}, {"path", s.path}, {"entries", s.entries}, {"distinctKeys", s.distinct_keys}});
      }
      out << body.dump(2) << "\n";
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      Store store = open_store(data_dir, true);
      std::ofstream file(export_path, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot write " + export_path);
      std::size_t n = 0;
      store.for_each_case([&](const RefactoringCase& c) {
        file << to_json(c).dump() << '\n';
        ++n;
      });
      file.close();
      if (!file) throw std::runtime_error("write to " + export_path + " failed");
      out << json{{"exported", n}, {"out", export_path}}.dump() << "\n";
      return kExitOk;
    }

    if (import_cmd->parsed()) {
      std::ifstream file(import_path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + import_path);
      std::vector<RefactoringCase> cases;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(file, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          RefactoringCase c = case_from_json(json::parse(line));
          if (auto problems = validate_case(c); !problems.empty()) throw std::invalid_argument(problems.front());
          cases.push_back(std::move(c));
        } catch (const std::exception& e) {
          err << import_path << ":" << line_no << ": invalid case: " << e.what() << "\n";
          return kExitFailure;
        }
      }
      Store store = open_store(data_dir, false);
      PutResult total;
      for (std::size_t i = 0; i < cases.size(); i += kStoreBatchSize) {
        const auto first = cases.begin() + static_cast<std::ptrdiff_t>(i);
        const auto last = cases.begin() + static_cast<std::ptrdiff_t>(std::min(cases.size(), i + kStoreBatchSize));
        PutResult r = store.put_cases(std::vector<RefactoringCase>(first, last));
        total.stored += r.stored;
        total.skipped_duplicate += r.skipped_duplicate;
      }
      out << json{{"imported", total.stored}, {"skippedDuplicate", total.skipped_duplicate}}.dump() << "\n";
      return kExitOk;
    }

    if (generate->parsed()) {
      Store store = open_store(data_dir, false);
      const auto start = std::chrono::steady_clock::now();
      PutResult total;
      generate_corpus(synth, [&](std::vector<RefactoringCase>&& batch) {
        PutResult r = store.put_cases(batch);
        total.stored += r.stored;
        total.skipped_duplicate += r.skipped_duplicate;
      });
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      out << json{{"generated", total.stored}, {"skippedDuplicate", total.skipped_duplicate}, {"seconds", elapsed.count()}}
                 .dump()
          << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace refsearch
