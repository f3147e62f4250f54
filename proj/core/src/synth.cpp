#include "refsearch/synth.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <random>

namespace refsearch {

namespace {

constexpr std::array kClasses{"NamedObjectInstantiator", "DependencyResolver", "TaskExecutor",   "ConfigLoader",
                              "ProjectBuilder",          "CacheManager",       "PluginRegistry", "FileWatcher",
                              "ArtifactPublisher",       "SessionFactory",     "HttpClient",     "QueryPlanner",
                              "EventBus",                "SchemaValidator",    "TokenStore",     "ReportWriter"};
constexpr std::array kVerbs{"get", "load", "build", "resolve", "create", "compute", "find", "parse", "update", "check"};
constexpr std::array kNouns{"Name",  "Config", "Value",   "Path",    "Loader", "Cache",   "Task",
                            "Entry", "Result", "Options", "Context", "Source", "Request", "Handler"};
constexpr std::array kParams{"", "String", "Class", "int", "List<String>", "Object", "File", "Map<String, Object>"};
constexpr std::array kPackages{"api", "internal", "core", "model", "util", "service"};
constexpr std::array kAuthors{"Alice Example", "Bob Builder", "Carol Coder", "Dan Developer", "Eve Engineer",
                              "Frank Fixer",   "Grace Hopper", "Heidi Hacker"};
constexpr std::array kMessages{"Polish `%s`",
                               "Extract helper methods from %s",
                               "Refactor %s for readability",
                               "Rename getters in %s",
                               "Fix NPE in %s",
                               "Clean up %s",
                               "Move %s to a shared package",
                               "Simplify %s by extracting common code",
                               "Add tests for %s",
                               "Inline trivial wrappers in %s"};

struct TypeWeight {
  const char* type;
  int weight;
};

constexpr std::array kTypeWeights{
    TypeWeight{"Extract Method", 20},       TypeWeight{"Rename Method", 12},       TypeWeight{"Rename Variable", 10},
    TypeWeight{"Extract Variable", 8},      TypeWeight{"Move Method", 8},          TypeWeight{"Rename Class", 6},
    TypeWeight{"Inline Method", 5},         TypeWeight{"Move Class", 5},           TypeWeight{"Pull Up Method", 4},
    TypeWeight{"Push Down Method", 3},      TypeWeight{"Extract And Move Method", 4}, TypeWeight{"Rename Attribute", 5},
    TypeWeight{"Move Attribute", 4},        TypeWeight{"Extract Class", 3},        TypeWeight{"Change Method Signature", 3},
};

// 2023-01-01T00:00:00Z
constexpr std::int64_t kEndEpoch = 1672531200;

class Generator {
 public:
  explicit Generator(const SynthOptions& o) : options_(o), rng_(o.seed) {
    std::vector<int> weights;
    for (const auto& t : kTypeWeights) weights.push_back(t.weight);
    type_dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  void run(const std::function<void(std::vector<RefactoringCase>&&)>& sink) {
    std::vector<RefactoringCase> batch;
    std::size_t produced = 0;
    while (produced < options_.count) {
      const std::size_t n = std::min<std::size_t>(uniform(1, 8), options_.count - produced);
      auto commit_cases = make_commit(n);
      produced += commit_cases.size();
      for (auto& c : commit_cases) {
        batch.push_back(std::move(c));
        if (batch.size() >= options_.batch_size) {
          sink(std::move(batch));
          batch = {};
        }
      }
    }
    if (!batch.empty()) sink(std::move(batch));
  }

 private:
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
  template <class A>
  const char* pick(const A& arr) {
    return arr[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(arr.size()) - 1))];
  }

  std::string hex40() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(40, '0');
    for (auto& ch : out) ch = kHex[uniform(0, 15)];
    return out;
  }

  std::string method_name() { return std::string(pick(kVerbs)) + pick(kNouns); }
  std::string signature(const std::string& name) { return name + "(" + pick(kParams) + ")"; }

  Location span(const std::string& file, std::int64_t lines) {
    const std::int64_t begin = uniform(1, 2000);
    return Location{file, lines, begin, begin + lines - 1};
  }

  std::vector<RefactoringCase> make_commit(std::size_t n) {
    CommitMeta commit;
    commit.sha1 = hex40();
    const std::int64_t start = kEndEpoch - static_cast<std::int64_t>(options_.years) * 365 * 86400 - 2 * 86400;
    commit.date = format_utc_timestamp(uniform(start, kEndEpoch - 1));
    const char* cls = pick(kClasses);
    char message[160];
    std::snprintf(message, sizeof message, pick(kMessages), cls);
    commit.message = message;
    commit.author_name = pick(kAuthors);
    commit.files_changed = uniform(1, 30);
    commit.lines_inserted = uniform(0, 2000);
    commit.lines_deleted = uniform(0, 2000);

    char repo[96];
    std::snprintf(repo, sizeof repo, "https://github.com/synth/project-%02lld",
                  static_cast<long long>(uniform(0, static_cast<std::int64_t>(options_.repositories) - 1)));
    const std::string file = std::string("src/main/java/org/synth/") + pick(kPackages) + "/" + cls + ".java";

    std::vector<RefactoringCase> out;
    std::map<std::string, std::int64_t> per_tool;
    for (std::size_t i = 0; i < n; ++i) {
      RefactoringCase c;
      c.repository = repo;
      c.commit = commit;
      c.tool = uniform(0, 9) < 6 ? "RefactoringMiner" : "RefDiff";
      c.type = kTypeWeights[type_dist_(rng_)].type;
      fill_elements(c, cls, file);
      c.id = case_id(c);
      out.push_back(std::move(c));
    }
    // Different names can still collide on the same id; keep one of each.
    std::map<std::string, std::size_t> seen;
    std::vector<RefactoringCase> unique;
    for (auto& c : out) {
      if (seen.emplace(c.id, unique.size()).second) unique.push_back(std::move(c));
    }
    for (const auto& c : unique) ++per_tool[c.tool];
    for (auto& c : unique) c.commit.refactorings_total = per_tool[c.tool];
    return unique;
  }

  void fill_elements(RefactoringCase& c, const std::string& cls, const std::string& file) {
    const std::string& t = c.type;
    if (t == "Extract Method" || t == "Extract And Move Method") {
      const std::int64_t source_lines = uniform(10, 300);
      const std::int64_t extracted = uniform(3, std::min<std::int64_t>(source_lines, 150));
      const std::string source = signature(method_name());
      const std::string target = signature(method_name() + std::string(pick(kNouns)));
      c.before = CodeFragmentRef{source, span(file, source_lines)};
      c.after = CodeFragmentRef{target, span(file, extracted)};
      c.extract_method = ExtractMethodInfo{uniform(0, 9) == 0 ? 2 : 1, source_lines, extracted};
      c.description = "Extracted method " + target + " from " + source + " in class " + cls;
      return;
    }
    if (t == "Rename Method") {
      std::string from = method_name();
      std::string to;
      if (from.rfind("get", 0) == 0 && uniform(0, 2) == 0) {
        to = "retrieve" + from.substr(3);
      } else {
        do {
          to = method_name();
        } while (to == from);
      }
      const std::string params = pick(kParams);
      const std::int64_t lines = uniform(1, 120);
      c.before = CodeFragmentRef{from + "(" + params + ")", span(file, lines)};
      c.after = CodeFragmentRef{to + "(" + params + ")", span(file, lines)};
      c.rename = RenameInfo{from, to};
      c.description = "Renamed method " + from + " to " + to + " in class " + cls;
      return;
    }
    if (t == "Rename Class") {
      const std::string from = cls;
      const std::string to = std::string(pick(kNouns)) + cls;
      const std::int64_t lines = uniform(20, 900);
      c.before = CodeFragmentRef{from, span(file, lines)};
      c.after = CodeFragmentRef{to, span(file, lines)};
      c.rename = RenameInfo{from, to};
      c.description = "Renamed class " + from + " to " + to;
      return;
    }
    if (t == "Rename Variable" || t == "Rename Attribute") {
      std::string from = std::string(pick(kNouns));
      from[0] = static_cast<char>(from[0] - 'A' + 'a');
      std::string to = from + pick(kNouns);
      c.before = CodeFragmentRef{from, span(file, 1)};
      c.after = CodeFragmentRef{to, span(file, 1)};
      c.rename = RenameInfo{from, to};
      c.description = (t == "Rename Variable" ? "Renamed variable " : "Renamed attribute ") + from + " to " + to +
                      " in class " + cls;
      return;
    }
    const std::string before = signature(method_name());
    const std::string after = t.find("Move") != std::string::npos || t.find("Pull") != std::string::npos ||
                                      t.find("Push") != std::string::npos
                                  ? before
                                  : signature(method_name());
    const std::int64_t lines = uniform(1, 200);
    c.before = CodeFragmentRef{before, span(file, lines)};
    c.after = CodeFragmentRef{after, span(file, t == "Inline Method" ? uniform(1, 200) : lines)};
    c.description = t + " " + before + " to " + after + " in class " + cls;
  }

  SynthOptions options_;
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> type_dist_;
};

}  // namespace

const std::vector<std::string>& synth_types() {
  static const std::vector<std::string> types = [] {
    std::vector<std::string> out;
    for (const auto& t : kTypeWeights) out.emplace_back(t.type);
    return out;
  }();
  return types;
}

void generate_corpus(const SynthOptions& options, const std::function<void(std::vector<RefactoringCase>&&)>& sink) {
  Generator(options).run(sink);
}

std::vector<RefactoringCase> generate_cases(const SynthOptions& options) {
  std::vector<RefactoringCase> out;
  out.reserve(options.count);
  generate_corpus(options, [&](std::vector<RefactoringCase>&& batch) {
    for (auto& c : batch) out.push_back(std::move(c));
  });
  return out;
}

}  // namespace refsearch
