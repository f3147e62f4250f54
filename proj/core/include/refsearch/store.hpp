#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "refsearch/query.hpp"
#include "refsearch/refactoring_case.hpp"

namespace refsearch {

class StoreIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted secondary index over one document path. Array values are indexed
/// per element; only string and number scalars are indexed.
struct IndexDef {
  std::string name;
  FieldPath path;
};

/// The built-in indexes: `type`, `repository` and `commit.date`.
const std::vector<IndexDef>& default_indexes();

struct QueryPlan {
  enum class Access { FullScan, IndexEq, IndexRange };

  Access access = Access::FullScan;
  std::string index;  // empty for FullScan
  std::optional<Literal> key;
  std::optional<Literal> lower;
  bool lower_inclusive = true;
  std::optional<Literal> upper;
  bool upper_inclusive = true;
  /// Re-checked on every candidate; nullopt means match-all.
  std::optional<QueryAst> residual;

  /// e.g. `IndexEq(type, "Extract Method")` or `FullScan`.
  std::string describe() const;
};

/// Picks an access path from the mandatory conjuncts of `ast`: equality on
/// `type`, else equality on `repository`, else equality or range on
/// `commit.date`, else a full scan. The residual is always the whole query.
QueryPlan plan_query(const QueryAst& ast);

struct SortSpec {
  FieldPath path = FieldPath::parse("commit.date");
  bool descending = true;

  /// `path:asc` or `path:desc`; a bare path sorts ascending. Throws
  /// std::invalid_argument.
  static SortSpec parse(std::string_view text);
  std::string to_string() const;
};

constexpr std::size_t kMaxPageSize = 200;
constexpr std::size_t kDefaultPageSize = 20;

struct SearchRequest {
  std::optional<QueryAst> query;  // nullopt matches everything
  std::size_t offset = 0;
  std::size_t limit = kDefaultPageSize;
  SortSpec sort;
  /// Bypasses the planner; used to cross-check planned searches.
  bool force_full_scan = false;
};

struct SearchPage {
  std::size_t total = 0;
  std::size_t offset = 0;  // the requested offset, capped at total
  std::size_t limit = 0;
  std::vector<RefactoringCase> items;
};

nlohmann::json to_json(const SearchPage& page);

struct PutResult {
  std::size_t stored = 0;
  std::size_t skipped_duplicate = 0;
};

struct IndexStats {
  std::string name;
  std::string path;
  std::size_t entries = 0;
  std::size_t distinct_keys = 0;
};

struct StoreStats {
  std::size_t case_count = 0;
  std::size_t commit_count = 0;
  std::size_t repository_count = 0;
  std::map<std::string, std::size_t> counts_by_type;
  std::map<std::string, std::size_t> counts_by_tool;
};

nlohmann::json to_json(const StoreStats& stats);

struct StoreOptions {
  bool read_only = false;
  /// fdatasync after every batch.
  bool sync = true;

  /// Test hook: the next batch write stops after this many bytes and fails.
  std::optional<std::size_t> fail_next_write_after;
  /// With the hook above, leave the torn bytes on disk as a crash would
  /// (no rollback). The store must then be discarded and reopened.
  bool simulate_crash = false;
};

/// Embedded document store for refactoring cases.
///
/// Documents live in memory with their secondary indexes; durability comes
/// from an append-only batch log in the data directory that is replayed on
/// open. A batch is a single log line and becomes visible only once the
/// whole line is on disk, so a torn write is discarded on the next open.
///
/// Any number of readers may run concurrently; writers are serialized and a
/// reader never observes a partially applied batch.
class Store {
 public:
  /// Opens or creates the store under `dir`. Throws StoreIoError.
  static Store open(const std::filesystem::path& dir, StoreOptions options = {});
  /// A store without a data directory.
  static Store in_memory();

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  /// Inserts cases whose id is not stored yet. The batch is all-or-nothing:
  /// on StoreIoError nothing is applied. Throws std::invalid_argument for a
  /// case that fails validation.
  PutResult put_cases(const std::vector<RefactoringCase>& batch);

  std::optional<RefactoringCase> get_case(std::string_view id) const;

  /// Removes every case of a repository. Returns how many were removed.
  std::size_t purge_repository(std::string_view repository);

  QueryPlan plan(const QueryAst& ast) const { return plan_query(ast); }

  /// Throws std::invalid_argument when limit exceeds kMaxPageSize.
  SearchPage search(const SearchRequest& request) const;

  /// Drops and rebuilds every index from the documents.
  std::vector<IndexStats> rebuild_indexes();
  std::vector<IndexStats> index_stats() const;

  StoreStats stats() const;
  std::size_t size() const;

  /// Visits cases in insertion order under a consistent snapshot. `visit` must
  /// not call back into the store.
  void for_each_case(const std::function<void(const RefactoringCase&)>& visit) const;

  /// Cross-checks every index against the documents; empty when consistent.
  std::vector<std::string> check_index_consistency() const;

  /// Arms the write-failure test hook on an open store.
  void inject_write_failure(std::size_t after_bytes, bool simulate_crash);

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace refsearch
