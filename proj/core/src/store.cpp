#include "refsearch/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <condition_variable>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "refsearch/eval.hpp"
#include "refsearch/field_value.hpp"

namespace refsearch {

namespace {

constexpr const char* kLogFile = "cases.log";

using IndexKey = std::variant<Decimal, std::string>;
using Postings = std::vector<std::uint32_t>;

struct Index {
  IndexDef def;
  std::map<IndexKey, Postings> postings;
  std::size_t entries = 0;
};

struct Doc {
  std::string id;
  FieldValue value;
};

void collect_keys(const FieldValue& v, std::vector<IndexKey>& out) {
  if (v.is_num()) {
    out.emplace_back(v.as_num());
  } else if (v.is_str()) {
    out.emplace_back(v.as_str());
  } else if (v.is_array()) {
    for (const auto& e : v.as_array()) collect_keys(e, out);
  }
}

std::vector<IndexKey> keys_for(const IndexDef& def, const FieldValue& doc) {
  std::vector<IndexKey> keys;
  collect_keys(resolve_path(doc, def.path), keys);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::string literal_text(const Literal& lit) {
  if (lit.is_num()) return lit.as_num().lexeme;
  if (lit.is_str()) return nlohmann::json(lit.as_str().text).dump();
  return "/" + lit.as_regex().pattern + "/";
}

// Sort key ordering: numbers, strings, booleans, then containers.
int kind_rank(const FieldValue& v) {
  switch (v.kind()) {
    case FieldValue::Kind::Num:
      return 0;
    case FieldValue::Kind::Str:
      return 1;
    case FieldValue::Kind::Bool:
      return 2;
    case FieldValue::Kind::Array:
      return 3;
    default:
      return 4;
  }
}

std::strong_ordering compare_sort_values(const FieldValue& a, const FieldValue& b) {
  const int ra = kind_rank(a);
  const int rb = kind_rank(b);
  if (ra != rb) return ra <=> rb;
  switch (a.kind()) {
    case FieldValue::Kind::Num:
      return a.as_num() <=> b.as_num();
    case FieldValue::Kind::Str:
      return a.as_str().compare(b.as_str()) <=> 0;
    case FieldValue::Kind::Bool:
      return a.as_bool() <=> b.as_bool();
    default:
      return std::strong_ordering::equal;
  }
}

RefactoringCase to_case(const FieldValue& doc) { return case_from_json(to_json_value(doc)); }

class LogFile {
 public:
  LogFile() = default;
  explicit LogFile(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StoreIoError("cannot open " + path.string() + ": " + std::strerror(errno));
  }
  LogFile(LogFile&& other) noexcept : path_(std::move(other.path_)), fd_(std::exchange(other.fd_, -1)) {}
  LogFile& operator=(LogFile&& other) noexcept {
    if (this != &other) {
      close();
      path_ = std::move(other.path_);
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~LogFile() { close(); }

  bool is_open() const { return fd_ >= 0; }

  off_t size() const {
    const off_t end = ::lseek(fd_, 0, SEEK_END);
    if (end < 0) throw StoreIoError("cannot stat " + path_.string());
    return end;
  }

  // Writes `bytes`, or only the first `limit` of them when a limit is given.
  // Returns false when the write was cut short by the limit.
  void append(std::string_view bytes, std::optional<std::size_t> limit, bool sync) {
    const std::size_t want = limit ? std::min(*limit, bytes.size()) : bytes.size();
    std::size_t done = 0;
    while (done < want) {
      const ssize_t n = ::write(fd_, bytes.data() + done, want - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw StoreIoError("write to " + path_.string() + " failed: " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    if (limit) throw StoreIoError("injected write failure after " + std::to_string(want) + " bytes");
    if (sync && ::fdatasync(fd_) != 0) {
      throw StoreIoError("fdatasync on " + path_.string() + " failed: " + std::strerror(errno));
    }
  }

  void truncate(off_t length) {
    if (::ftruncate(fd_, length) != 0) {
      throw StoreIoError("truncate of " + path_.string() + " failed: " + std::strerror(errno));
    }
  }

 private:
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<IndexDef>& default_indexes() {
  static const std::vector<IndexDef> defs{
      {"type", FieldPath::parse("type")},
      {"repository", FieldPath::parse("repository")},
      {"commit.date", FieldPath::parse("commit.date")},
  };
  return defs;
}

std::string QueryPlan::describe() const {
  switch (access) {
    case Access::FullScan:
      return "FullScan";
    case Access::IndexEq:
      return "IndexEq(" + index + ", " + literal_text(*key) + ")";
    case Access::IndexRange: {
      std::string out = "IndexRange(" + index + ", ";
      out += lower ? (lower_inclusive ? "[" : "(") + literal_text(*lower) : "(-inf";
      out += ", ";
      out += upper ? literal_text(*upper) + (upper_inclusive ? "]" : ")") : "+inf)";
      return out + ")";
    }
  }
  return "?";
}

namespace {

bool same_kind(const Literal& a, const Literal& b) { return a.is_num() == b.is_num() && a.is_str() == b.is_str(); }

std::strong_ordering compare_literals(const Literal& a, const Literal& b) {
  if (a.is_num()) return a.as_num().value <=> b.as_num().value;
  return a.as_str().text.compare(b.as_str().text) <=> 0;
}

}  // namespace

QueryPlan plan_query(const QueryAst& ast) {
  QueryPlan plan;
  plan.residual = ast;
  const std::vector<Comparison> conjuncts = index_candidates(ast);

  for (const IndexDef& def : default_indexes()) {
    for (const Comparison& c : conjuncts) {
      if (c.path == def.path && c.op == ComparisonOp::Eq && !c.literal.is_regex()) {
        plan.access = QueryPlan::Access::IndexEq;
        plan.index = def.name;
        plan.key = c.literal;
        return plan;
      }
    }
    if (def.name != "commit.date") continue;

    for (const Comparison& c : conjuncts) {
      if (c.path != def.path || c.literal.is_regex()) continue;
      const bool is_lower = c.op == ComparisonOp::Gt || c.op == ComparisonOp::Ge;
      const bool is_upper = c.op == ComparisonOp::Lt || c.op == ComparisonOp::Le;
      if (!is_lower && !is_upper) continue;
      // Bounds of a different literal kind than the first one stay residual.
      const std::optional<Literal>& first = plan.lower ? plan.lower : plan.upper;
      if (first && !same_kind(*first, c.literal)) continue;
      const bool inclusive = c.op == ComparisonOp::Ge || c.op == ComparisonOp::Le;
      if (is_lower) {
        if (!plan.lower || compare_literals(c.literal, *plan.lower) > 0 ||
            (compare_literals(c.literal, *plan.lower) == 0 && !inclusive)) {
          plan.lower = c.literal;
          plan.lower_inclusive = inclusive;
        }
      } else {
        if (!plan.upper || compare_literals(c.literal, *plan.upper) < 0 ||
            (compare_literals(c.literal, *plan.upper) == 0 && !inclusive)) {
          plan.upper = c.literal;
          plan.upper_inclusive = inclusive;
        }
      }
    }
    if (plan.lower || plan.upper) {
      plan.access = QueryPlan::Access::IndexRange;
      plan.index = def.name;
      return plan;
    }
  }
  return plan;
}

SortSpec SortSpec::parse(std::string_view text) {
  SortSpec spec;
  std::string_view path = text;
  spec.descending = false;
  const std::size_t colon = text.rfind(':');
  if (colon != std::string_view::npos) {
    path = text.substr(0, colon);
    const std::string_view dir = text.substr(colon + 1);
    if (dir == "desc") {
      spec.descending = true;
    } else if (dir != "asc") {
      throw std::invalid_argument("sort direction must be 'asc' or 'desc', got '" + std::string(dir) + "'");
    }
  }
  spec.path = FieldPath::parse(path);
  return spec;
}

std::string SortSpec::to_string() const { return path.to_string() + (descending ? ":desc" : ":asc"); }

nlohmann::json to_json(const SearchPage& page) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& c : page.items) items.push_back(to_json(c));
  return {{"total", page.total}, {"offset", page.offset}, {"limit", page.limit}, {"items", std::move(items)}};
}

nlohmann::json to_json(const StoreStats& stats) {
  return {{"caseCount", stats.case_count},
          {"commitCount", stats.commit_count},
          {"repositoryCount", stats.repository_count},
          {"countsByType", stats.counts_by_type},
          {"countsByTool", stats.counts_by_tool}};
}

// ---------------------------------------------------------------------------

// Shared mutex that admits no new readers while a writer waits, so a steady
// stream of searches cannot hold off ingestion. Not reentrant for readers.
class WriterPreferringMutex {
 public:
  void lock() {
    std::unique_lock g(m_);
    ++waiting_writers_;
    cv_.wait(g, [&] { return !writer_ && readers_ == 0; });
    --waiting_writers_;
    writer_ = true;
  }
  void unlock() {
    {
      std::lock_guard g(m_);
      writer_ = false;
    }
    cv_.notify_all();
  }
  void lock_shared() {
    std::unique_lock g(m_);
    cv_.wait(g, [&] { return !writer_ && waiting_writers_ == 0; });
    ++readers_;
  }
  void unlock_shared() {
    bool last = false;
    {
      std::lock_guard g(m_);
      last = --readers_ == 0;
    }
    if (last) cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::size_t readers_ = 0;
  std::size_t waiting_writers_ = 0;
  bool writer_ = false;
};

struct Store::Impl {
  std::filesystem::path dir;
  StoreOptions options;
  LogFile log;

  mutable WriterPreferringMutex mutex;  // guards docs, by_id, indexes
  std::mutex writer;                // serializes mutations

  std::vector<Doc> docs;
  std::unordered_map<std::string, std::uint32_t> by_id;
  std::vector<Index> indexes;

  Impl() {
    for (const IndexDef& def : default_indexes()) indexes.push_back(Index{def, {}, 0});
  }

  bool persistent() const { return log.is_open(); }

  static void index_doc(Index& index, std::uint32_t pos, const FieldValue& doc) {
    for (auto& key : keys_for(index.def, doc)) {
      index.postings[std::move(key)].push_back(pos);
      ++index.entries;
    }
  }

  void append_doc(std::string id, FieldValue value) {
    const auto pos = static_cast<std::uint32_t>(docs.size());
    for (Index& index : indexes) index_doc(index, pos, value);
    by_id.emplace(id, pos);
    docs.push_back(Doc{std::move(id), std::move(value)});
  }

  std::vector<Index> build_indexes() const {
    std::vector<Index> fresh;
    for (const Index& old : indexes) fresh.push_back(Index{old.def, {}, 0});
    for (std::size_t pos = 0; pos < docs.size(); ++pos) {
      for (Index& index : fresh) index_doc(index, static_cast<std::uint32_t>(pos), docs[pos].value);
    }
    return fresh;
  }

  void remove_repository(std::string_view repository) {
    std::vector<Doc> kept;
    kept.reserve(docs.size());
    for (auto& d : docs) {
      const FieldValue* repo = d.value.find("repository");
      if (repo == nullptr || !repo->is_str() || repo->as_str() != repository) kept.push_back(std::move(d));
    }
    docs = std::move(kept);
    by_id.clear();
    for (std::size_t pos = 0; pos < docs.size(); ++pos) by_id.emplace(docs[pos].id, static_cast<std::uint32_t>(pos));
    indexes = build_indexes();
  }

  // Replays one committed log line.
  void apply_log_line(const std::string& line) {
    FieldValue record = parse_json_text(line);
    const FieldValue* op = record.find("op");
    if (op == nullptr || !op->is_str()) throw StoreIoError("log record without op");
    if (op->as_str() == "put") {
      const FieldValue* cases = record.find("cases");
      if (cases == nullptr || !cases->is_array()) throw StoreIoError("put record without cases");
      for (auto& doc : record.as_object()) {
        if (doc.first != "cases") continue;
        for (auto& value : doc.second.as_array()) {
          const FieldValue* id = value.find("id");
          if (id == nullptr || !id->is_str()) throw StoreIoError("logged case without id");
          std::string key = id->as_str();
          if (by_id.count(key) == 0) append_doc(std::move(key), std::move(value));
        }
      }
    } else if (op->as_str() == "purge") {
      const FieldValue* repo = record.find("repository");
      if (repo == nullptr || !repo->is_str()) throw StoreIoError("purge record without repository");
      remove_repository(repo->as_str());
    } else {
      throw StoreIoError("unknown log op '" + op->as_str() + "'");
    }
  }

  void replay() {
    const std::filesystem::path path = dir / kLogFile;
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::string line;
    std::uint64_t good_offset = 0;
    std::uint64_t offset = 0;
    std::size_t line_no = 0;
    bool torn = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (in.eof()) {
        // Last line without its newline: a batch that never finished.
        torn = !line.empty();
        break;
      }
      offset += line.size() + 1;
      if (!line.empty()) {
        try {
          apply_log_line(line);
        } catch (const std::exception& e) {
          throw StoreIoError(path.string() + ":" + std::to_string(line_no) + ": corrupt log record: " + e.what());
        }
      }
      good_offset = offset;
    }
    if (torn && !options.read_only) {
      std::filesystem::resize_file(path, good_offset);
    }
  }

  void write_record(const std::string& line) {
    if (!persistent()) return;
    if (options.read_only) throw StoreIoError("store is open read-only");
    const off_t before = log.size();
    std::optional<std::size_t> limit = std::exchange(options.fail_next_write_after, std::nullopt);
    try {
      log.append(line, limit, options.sync);
    } catch (const StoreIoError&) {
      if (!options.simulate_crash) log.truncate(before);
      throw;
    }
  }

  void candidates_from_index(const QueryPlan& plan, std::vector<std::uint32_t>& out) const {
    const Index* index = nullptr;
    for (const Index& i : indexes) {
      if (i.def.name == plan.index) index = &i;
    }
    if (index == nullptr) throw std::logic_error("plan refers to unknown index " + plan.index);

    auto add = [&](const IndexKey& key) {
      auto it = index->postings.find(key);
      if (it != index->postings.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    };

    if (plan.access == QueryPlan::Access::IndexEq) {
      const Literal& key = *plan.key;
      if (key.is_num()) add(IndexKey(key.as_num().value));
      add(IndexKey(key.text()));  // numbers also equal strings spelled as their lexeme
    } else {
      const bool numeric = (plan.lower ? *plan.lower : *plan.upper).is_num();
      auto to_key = [](const Literal& l) { return l.is_num() ? IndexKey(l.as_num().value) : IndexKey(l.text()); };
      auto it = plan.lower ? (plan.lower_inclusive ? index->postings.lower_bound(to_key(*plan.lower))
                                                   : index->postings.upper_bound(to_key(*plan.lower)))
                           : (numeric ? index->postings.begin() : index->postings.lower_bound(IndexKey(std::string())));
      auto end = plan.upper ? (plan.upper_inclusive ? index->postings.upper_bound(to_key(*plan.upper))
                                                    : index->postings.lower_bound(to_key(*plan.upper)))
                            : (numeric ? index->postings.lower_bound(IndexKey(std::string())) : index->postings.end());
      for (; it != end && it != index->postings.end(); ++it) {
        if (numeric != std::holds_alternative<Decimal>(it->first)) break;
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
};

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

Store Store::open(const std::filesystem::path& dir, StoreOptions options) {
  auto impl = std::make_unique<Impl>();
  impl->dir = dir;
  impl->options = options;
  std::error_code ec;
  if (!options.read_only) {
    std::filesystem::create_directories(dir, ec);
    if (ec) throw StoreIoError("cannot create data directory " + dir.string() + ": " + ec.message());
  }
  impl->replay();
  if (!options.read_only) impl->log = LogFile(dir / kLogFile);
  return Store(std::move(impl));
}

Store Store::in_memory() { return Store(std::make_unique<Impl>()); }

PutResult Store::put_cases(const std::vector<RefactoringCase>& batch) {
  if (impl_->options.read_only) throw StoreIoError("store is open read-only");
  for (const auto& c : batch) {
    auto problems = validate_case(c);
    if (!problems.empty()) throw std::invalid_argument("invalid case " + c.id + ": " + problems.front());
  }

  std::lock_guard writer(impl_->writer);
  PutResult result;
  std::vector<std::pair<std::string, nlohmann::json>> fresh;
  std::unordered_set<std::string> seen;
  for (const auto& c : batch) {
    if (impl_->by_id.count(c.id) != 0 || !seen.insert(c.id).second) {
      ++result.skipped_duplicate;
      continue;
    }
    fresh.emplace_back(c.id, to_json(c));
  }
  result.stored = fresh.size();
  if (fresh.empty()) return result;

  if (impl_->persistent()) {
    std::string line = R"({"op":"put","cases":[)";
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (i) line += ',';
      line += fresh[i].second.dump();
    }
    line += "]}\n";
    impl_->write_record(line);
  }

  std::vector<FieldValue> values;
  values.reserve(fresh.size());
  for (const auto& [id, json] : fresh) values.push_back(from_json_value(json));

  std::unique_lock lock(impl_->mutex);
  for (std::size_t i = 0; i < fresh.size(); ++i) impl_->append_doc(std::move(fresh[i].first), std::move(values[i]));
  return result;
}

std::optional<RefactoringCase> Store::get_case(std::string_view id) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->by_id.find(std::string(id));
  if (it == impl_->by_id.end()) return std::nullopt;
  return to_case(impl_->docs[it->second].value);
}

std::size_t Store::purge_repository(std::string_view repository) {
  if (impl_->options.read_only) throw StoreIoError("store is open read-only");
  std::lock_guard writer(impl_->writer);
  nlohmann::json record{{"op", "purge"}, {"repository", std::string(repository)}};
  impl_->write_record(record.dump() + "\n");
  std::unique_lock lock(impl_->mutex);
  const std::size_t before = impl_->docs.size();
  impl_->remove_repository(repository);
  return before - impl_->docs.size();
}

SearchPage Store::search(const SearchRequest& request) const {
  if (request.limit > kMaxPageSize) {
    throw std::invalid_argument("limit must be at most " + std::to_string(kMaxPageSize));
  }
  std::shared_lock lock(impl_->mutex);
  const auto& docs = impl_->docs;

  std::vector<std::uint32_t> matches;
  if (!request.query) {
    matches.resize(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) matches[i] = static_cast<std::uint32_t>(i);
  } else {
    QueryPlan plan;
    if (!request.force_full_scan) plan = plan_query(*request.query);
    if (plan.access == QueryPlan::Access::FullScan) {
      for (std::size_t i = 0; i < docs.size(); ++i) {
        if (eval_query(*request.query, docs[i].value)) matches.push_back(static_cast<std::uint32_t>(i));
      }
    } else {
      std::vector<std::uint32_t> candidates;
      impl_->candidates_from_index(plan, candidates);
      for (std::uint32_t pos : candidates) {
        if (eval_query(*request.query, docs[pos].value)) matches.push_back(pos);
      }
    }
  }

  SearchPage page;
  page.total = matches.size();
  // A page past the end is reported at the end so offset + items <= total.
  page.offset = std::min(request.offset, matches.size());
  page.limit = request.limit;
  if (request.offset >= matches.size() || request.limit == 0) return page;

  // Sort keys, resolved once per match. Array-valued keys are materialized.
  struct Entry {
    const FieldValue* key;
    std::uint32_t pos;
  };
  std::deque<FieldValue> owned;
  std::vector<Entry> entries;
  entries.reserve(matches.size());
  const auto& segments = request.sort.path.segments();
  for (std::uint32_t pos : matches) {
    const FieldValue* node = &docs[pos].value;
    for (const auto& segment : segments) {
      if (node->is_array()) break;
      node = node->find(segment);
      if (node == nullptr) break;
    }
    if (node != nullptr && node->is_array()) {
      owned.push_back(resolve_path(docs[pos].value, request.sort.path));
      node = &owned.back();
    }
    if (node != nullptr && (node->is_missing() || node->is_null())) node = nullptr;
    entries.push_back(Entry{node, pos});
  }

  const bool descending = request.sort.descending;
  auto less = [&](const Entry& a, const Entry& b) {
    if ((a.key == nullptr) != (b.key == nullptr)) return b.key == nullptr;  // missing keys last
    if (a.key != nullptr) {
      const auto order = compare_sort_values(*a.key, *b.key);
      if (order != 0) return descending ? order > 0 : order < 0;
    }
    return docs[a.pos].id < docs[b.pos].id;
  };
  const std::size_t end = std::min(matches.size(), request.offset + request.limit);
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(end), entries.end(), less);
  for (std::size_t i = request.offset; i < end; ++i) page.items.push_back(to_case(docs[entries[i].pos].value));
  return page;
}

std::vector<IndexStats> Store::rebuild_indexes() {
  std::lock_guard writer(impl_->writer);
  std::vector<Index> fresh;
  {
    std::shared_lock lock(impl_->mutex);
    fresh = impl_->build_indexes();
  }
  {
    std::unique_lock lock(impl_->mutex);
    impl_->indexes = std::move(fresh);
  }
  return index_stats();
}

std::vector<IndexStats> Store::index_stats() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<IndexStats> out;
  for (const Index& index : impl_->indexes) {
    out.push_back(IndexStats{index.def.name, index.def.path.to_string(), index.entries, index.postings.size()});
  }
  return out;
}

StoreStats Store::stats() const {
  std::shared_lock lock(impl_->mutex);
  StoreStats s;
  std::unordered_set<std::string> commits;
  std::unordered_set<std::string> repositories;
  static const FieldPath kSha1 = FieldPath::parse("commit.sha1");
  static const FieldPath kTool = FieldPath::parse("meta.tool");
  for (const Doc& d : impl_->docs) {
    ++s.case_count;
    if (const FieldValue* type = d.value.find("type"); type && type->is_str()) ++s.counts_by_type[type->as_str()];
    if (const FieldValue* repo = d.value.find("repository"); repo && repo->is_str()) repositories.insert(repo->as_str());
    FieldValue sha1 = resolve_path(d.value, kSha1);
    if (sha1.is_str()) commits.insert(sha1.as_str());
    FieldValue tool = resolve_path(d.value, kTool);
    if (tool.is_str()) ++s.counts_by_tool[tool.as_str()];
  }
  s.commit_count = commits.size();
  s.repository_count = repositories.size();
  return s;
}

std::size_t Store::size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->docs.size();
}

void Store::for_each_case(const std::function<void(const RefactoringCase&)>& visit) const {
  std::shared_lock lock(impl_->mutex);
  for (const Doc& d : impl_->docs) visit(to_case(d.value));
}

std::vector<std::string> Store::check_index_consistency() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<std::string> problems;
  for (const Index& index : impl_->indexes) {
    std::size_t expected_entries = 0;
    for (std::size_t pos = 0; pos < impl_->docs.size(); ++pos) {
      for (const IndexKey& key : keys_for(index.def, impl_->docs[pos].value)) {
        ++expected_entries;
        auto it = index.postings.find(key);
        if (it == index.postings.end() ||
            !std::binary_search(it->second.begin(), it->second.end(), static_cast<std::uint32_t>(pos))) {
          problems.push_back("index " + index.def.name + " misses document " + impl_->docs[pos].id);
        }
      }
    }
    std::size_t actual_entries = 0;
    for (const auto& [key, postings] : index.postings) {
      actual_entries += postings.size();
      for (std::uint32_t pos : postings) {
        if (pos >= impl_->docs.size()) problems.push_back("index " + index.def.name + " points past the end");
      }
    }
    if (actual_entries != expected_entries || actual_entries != index.entries) {
      problems.push_back("index " + index.def.name + " has " + std::to_string(actual_entries) + " entries, expected " +
                         std::to_string(expected_entries));
    }
  }
  return problems;
}

void Store::inject_write_failure(std::size_t after_bytes, bool simulate_crash) {
  std::lock_guard writer(impl_->writer);
  impl_->options.fail_next_write_after = after_bytes;
  impl_->options.simulate_crash = simulate_crash;
}

}  // namespace refsearch
