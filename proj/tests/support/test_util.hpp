#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "refsearch/refactoring_case.hpp"
#include "refsearch/store.hpp"

namespace testutil {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("refsearch-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(REFSEARCH_FIXTURE_DIR) / relative;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Fills in `id` from the document content and returns the parsed case.
inline refsearch::RefactoringCase with_id(nlohmann::json& doc) {
  refsearch::RefactoringCase c = refsearch::case_from_json(doc);
  c.id = refsearch::case_id(c);
  doc["id"] = c.id;
  return c;
}

/// Every match of `query` in result order, paging with the largest page.
inline std::vector<std::string> all_ids(const refsearch::Store& store, const std::optional<refsearch::QueryAst>& query,
                                        bool force_full_scan = false,
                                        refsearch::SortSpec sort = refsearch::SortSpec{}) {
  std::vector<std::string> ids;
  refsearch::SearchRequest request;
  request.query = query;
  request.limit = refsearch::kMaxPageSize;
  request.force_full_scan = force_full_scan;
  request.sort = std::move(sort);
  for (;;) {
    refsearch::SearchPage page = store.search(request);
    for (const auto& c : page.items) ids.push_back(c.id);
    request.offset += page.items.size();
    if (page.items.empty() || request.offset >= page.total) break;
  }
  return ids;
}

}  // namespace testutil
