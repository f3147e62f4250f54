#include "refsearch/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "refsearch/process.hpp"

namespace refsearch {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::optional<std::int64_t> int_field(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    auto it = obj.find(key);
    if (it != obj.end() && it->is_number_integer()) return it->get<std::int64_t>();
  }
  return std::nullopt;
}

// Splits "a, Map<K, V> b" on top-level commas.
std::vector<std::string_view> split_params(std::string_view params) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const char c = params[i];
    if (c == '<' || c == '(' || c == '[') ++depth;
    if (c == '>' || c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(params.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (auto last = trim(params.substr(start)); !last.empty()) out.push_back(last);
  return out;
}

// RefactoringMiner prints methods as "public loaderFor(type Class<?>) : Loader";
// we keep "loaderFor(Class<?>)" to line up with RefDiff's naming.
std::string rminer_element_name(std::string_view code_element) {
  const std::size_t open = code_element.find('(');
  const std::size_t close = code_element.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::string(trim(code_element));
  }
  std::string_view head = trim(code_element.substr(0, open));
  if (auto space = head.find_last_of(" \t"); space != std::string_view::npos) head = head.substr(space + 1);
  std::string out(head);
  out += '(';
  bool first = true;
  for (std::string_view param : split_params(code_element.substr(open + 1, close - open - 1))) {
    // "name Type" -> "Type"
    if (auto space = param.find(' '); space != std::string_view::npos) param = trim(param.substr(space + 1));
    if (!first) out += ", ";
    out += param;
    first = false;
  }
  out += ')';
  return out;
}

std::optional<std::string> rminer_location(const json& loc, CodeElement& out) {
  if (!loc.is_object()) return "location is not an object";
  out.role = string_field(loc, "description");
  out.name = rminer_element_name(string_field(loc, "codeElement"));
  out.file = string_field(loc, "filePath");
  out.begin_line = int_field(loc, {"startLine"});
  out.end_line = int_field(loc, {"endLine"});
  return std::nullopt;
}

std::optional<std::string> refdiff_node(const json& node, const char* role, CodeElement& out) {
  if (!node.is_object()) return std::string(role) + " is not an object";
  out.role = role;
  for (const char* key : {"localName", "simpleName", "name"}) {
    out.name = string_field(node, key);
    if (!out.name.empty()) break;
  }
  if (auto loc = node.find("location"); loc != node.end() && loc->is_object()) {
    out.file = string_field(*loc, "file");
    out.begin_line = int_field(*loc, {"beginLine", "line"});
    out.end_line = int_field(*loc, {"endLine"});
  }
  return std::nullopt;
}

std::string generated_description(const DetectorRecord& r) {
  const std::string before = r.left.empty() ? std::string() : r.left.front().name;
  const std::string after = r.right.empty() ? std::string() : r.right.front().name;
  if (is_extract_method_type(r.type) && !before.empty() && !after.empty()) {
    return "Extracted method " + after + " from " + before;
  }
  if (r.type.rfind("Rename", 0) == 0 && !before.empty() && !after.empty()) {
    return "Renamed " + before + " to " + after;
  }
  if (!before.empty() && !after.empty()) return r.type + " " + before + " to " + after;
  if (!before.empty() || !after.empty()) return r.type + " " + (before.empty() ? after : before);
  return r.type;
}

bool has_content(const DetectorRecord& r) { return !r.left.empty() || !r.right.empty() || !r.description.empty(); }

void parse_rminer_entry(const json& entry, const std::string& sha1, std::size_t index, ParsedDetectorOutput& out) {
  auto reject = [&](const std::string& why) {
    ++out.rejected;
    out.rejections.push_back("commit " + sha1 + " refactoring #" + std::to_string(index) + ": " + why);
  };
  if (!entry.is_object()) return reject("entry is not an object");
  DetectorRecord r;
  r.tool = kRefactoringMiner;
  r.commit_sha1 = sha1;
  r.type = string_field(entry, "type");
  if (r.type.empty()) return reject("missing type");
  r.description = string_field(entry, "description");
  for (auto [key, side] : {std::pair{"leftSideLocations", &r.left}, {"rightSideLocations", &r.right}}) {
    auto it = entry.find(key);
    if (it == entry.end() || it->is_null()) continue;
    if (!it->is_array()) return reject(std::string(key) + " is not an array");
    for (const auto& loc : *it) {
      CodeElement e;
      if (auto problem = rminer_location(loc, e)) return reject(*problem);
      side->push_back(std::move(e));
    }
  }
  if (!has_content(r)) return reject("no code elements and no description");
  r.raw = entry;
  out.records.push_back(std::move(r));
}

void parse_refdiff_relationship(const json& rel, const std::string& sha1, std::size_t index,
                                ParsedDetectorOutput& out) {
  auto reject = [&](const std::string& why) {
    ++out.rejected;
    out.rejections.push_back("commit " + sha1 + " relationship #" + std::to_string(index) + ": " + why);
  };
  if (!rel.is_object()) return reject("relationship is not an object");
  const std::string kind = string_field(rel, "type");
  if (kind.empty()) return reject("missing type");
  // SAME links unchanged nodes; it is not a refactoring.
  if (kind == "SAME") return;

  DetectorRecord r;
  r.tool = kRefDiff;
  r.commit_sha1 = sha1;
  std::string node_type;
  for (auto [key, side] : {std::pair{"nodeBefore", &r.left}, {"nodeAfter", &r.right}}) {
    auto it = rel.find(key);
    if (it == rel.end() || it->is_null()) continue;
    CodeElement e;
    if (auto problem = refdiff_node(*it, key, e)) return reject(*problem);
    if (node_type.empty()) node_type = string_field(*it, "type");
    side->push_back(std::move(e));
  }
  r.type = translate_refdiff_type(kind, node_type);
  r.description = string_field(rel, "description");
  if (r.description.empty()) r.description = generated_description(r);
  r.raw = rel;
  out.records.push_back(std::move(r));
}

std::string require_sha1(const json& obj, const char* key, const std::string& where) {
  std::string sha1 = lower(string_field(obj, key));
  if (sha1.empty()) throw IngestError(where + " has no " + key);
  return sha1;
}

}  // namespace

// ---------------------------------------------------------------------------

ParsedDetectorOutput parse_rminer_output(const json& doc) {
  if (!doc.is_object() || !doc.contains("commits") || !doc["commits"].is_array()) {
    throw IngestError("RefactoringMiner output must be an object with a \"commits\" array");
  }
  ParsedDetectorOutput out;
  std::size_t commit_index = 0;
  for (const auto& commit : doc["commits"]) {
    const std::string where = "commit #" + std::to_string(commit_index++);
    if (!commit.is_object()) throw IngestError(where + " is not an object");
    const std::string sha1 = require_sha1(commit, "sha1", where);
    out.commits.insert(sha1);
    auto it = commit.find("refactorings");
    if (it == commit.end() || it->is_null()) continue;
    if (!it->is_array()) throw IngestError(where + ": \"refactorings\" is not an array");
    std::size_t index = 0;
    for (const auto& entry : *it) parse_rminer_entry(entry, sha1, index++, out);
  }
  return out;
}

ParsedDetectorOutput parse_refdiff_output(const json& doc) {
  ParsedDetectorOutput out;
  if (doc.is_object() && doc.contains("commits") && doc["commits"].is_array()) {
    std::size_t commit_index = 0;
    for (const auto& commit : doc["commits"]) {
      const std::string where = "commit #" + std::to_string(commit_index++);
      if (!commit.is_object()) throw IngestError(where + " is not an object");
      const std::string sha1 = require_sha1(commit, "sha1", where);
      out.commits.insert(sha1);
      auto it = commit.find("relationships");
      if (it == commit.end() || it->is_null()) continue;
      if (!it->is_array()) throw IngestError(where + ": \"relationships\" is not an array");
      std::size_t index = 0;
      for (const auto& rel : *it) parse_refdiff_relationship(rel, sha1, index++, out);
    }
    return out;
  }
  if (doc.is_array()) {
    std::size_t index = 0;
    for (const auto& rel : doc) {
      const std::string where = "relationship #" + std::to_string(index);
      if (!rel.is_object()) throw IngestError(where + " is not an object");
      const std::string sha1 = require_sha1(rel, "commit", where);
      out.commits.insert(sha1);
      parse_refdiff_relationship(rel, sha1, index++, out);
    }
    return out;
  }
  throw IngestError("RefDiff output must be an object with a \"commits\" array or an array of relationships");
}

std::optional<std::string> canonical_tool(std::string_view tool) {
  const std::string t = lower(tool);
  if (t == "refactoringminer" || t == "rminer") return std::string(kRefactoringMiner);
  if (t == "refdiff") return std::string(kRefDiff);
  return std::nullopt;
}

ParsedDetectorOutput parse_detector_output(std::string_view tool, std::string_view text) {
  auto canonical = canonical_tool(tool);
  if (!canonical) throw IngestError("no parser for detector '" + std::string(tool) + "'");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError("malformed " + *canonical + " JSON: " + e.what());
  }
  return *canonical == kRefDiff ? parse_refdiff_output(doc) : parse_rminer_output(doc);
}

std::string translate_refdiff_type(std::string_view relationship, std::string_view node_type) {
  const bool is_type_node = node_type == "Class" || node_type == "Interface" || node_type == "Enum";
  const std::string element = is_type_node ? "Class" : "Method";
  if (relationship == "EXTRACT") return is_type_node ? "Extract Class" : "Extract Method";
  if (relationship == "EXTRACT_MOVE") return "Extract And Move Method";
  if (relationship == "INLINE") return "Inline Method";
  if (relationship == "RENAME") return "Rename " + element;
  if (relationship == "MOVE") return "Move " + element;
  if (relationship == "MOVE_RENAME") return "Move And Rename " + element;
  if (relationship == "PULL_UP") return "Pull Up Method";
  if (relationship == "PUSH_DOWN") return "Push Down Method";
  if (relationship == "CHANGE_SIGNATURE") return "Change Method Signature";
  if (relationship == "EXTRACT_SUPER") return node_type == "Interface" ? "Extract Interface" : "Extract Superclass";
  return std::string(relationship);
}

// ---------------------------------------------------------------------------

json to_json(const CommitRecord& c) {
  return {{"sha1", c.sha1},
          {"date", c.date},
          {"message", c.message},
          {"authorName", c.author_name},
          {"filesChanged", c.files_changed},
          {"linesInserted", c.lines_inserted},
          {"linesDeleted", c.lines_deleted}};
}

CommitRecord commit_from_json(const json& j) {
  if (!j.is_object()) throw IngestError("commit record is not an object");
  CommitRecord c;
  c.sha1 = lower(string_field(j, "sha1"));
  if (!is_hex_sha1(c.sha1)) throw IngestError("commit record needs a 40-hex \"sha1\"");
  auto date = normalize_iso8601_utc(string_field(j, "date"));
  if (!date) throw IngestError("commit " + c.sha1 + ": \"date\" is not an ISO-8601 timestamp");
  c.date = *date;
  for (auto [key, target] : {std::pair{"message", &c.message}, {"authorName", &c.author_name}}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_string()) throw IngestError("commit " + c.sha1 + ": \"" + key + "\" is not a string");
    *target = it->get<std::string>();
  }
  for (auto [key, target] : {std::pair{"filesChanged", &c.files_changed},
                             {"linesInserted", &c.lines_inserted},
                             {"linesDeleted", &c.lines_deleted}}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw IngestError("commit " + c.sha1 + ": \"" + key + "\" must be a non-negative integer");
    }
    *target = it->get<std::int64_t>();
  }
  return c;
}

CommitMap read_commits_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open commits file " + path.string());
  CommitMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      CommitRecord c = commit_from_json(json::parse(line));
      out[c.sha1] = std::move(c);
    } catch (const std::exception& e) {
      throw IngestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// " 2 files changed, 171 insertions(+), 175 deletions(-)"
void parse_shortstat(std::string_view text, CommitRecord& c) {
  std::istringstream in{std::string(text)};
  std::string part;
  while (std::getline(in, part, ',')) {
    std::istringstream words(part);
    std::int64_t n = 0;
    std::string what;
    if (!(words >> n >> what)) continue;
    if (what.rfind("file", 0) == 0) c.files_changed = n;
    if (what.rfind("insertion", 0) == 0) c.lines_inserted = n;
    if (what.rfind("deletion", 0) == 0) c.lines_deleted = n;
  }
}

}  // namespace

CommitMap read_git_history(const std::filesystem::path& clone_path) {
  if (!std::filesystem::is_directory(clone_path)) {
    throw IngestError("clone path " + clone_path.string() + " is not a directory");
  }
  ProcessResult r;
  try {
    r = run_process("git",
                    {"-C", clone_path.string(), "log", "--all", "--no-renames", "--diff-merges=first-parent",
                     "--shortstat", "--format=%x1e%H%x1f%at%x1f%an%x1f%B%x1d"},
                    {{"LC_ALL", "C"}, {"GIT_CONFIG_NOSYSTEM", "1"}});
  } catch (const std::exception& e) {
    throw IngestError(e.what());
  }
  if (r.exit_code != 0) throw IngestError("git log failed in " + clone_path.string() + ": " + std::string(trim(r.err)));

  CommitMap out;
  std::string_view rest = r.out;
  while (!rest.empty()) {
    const std::size_t start = rest.find('\x1e');
    if (start == std::string_view::npos) break;
    rest.remove_prefix(start + 1);
    const std::size_t next = rest.find('\x1e');
    std::string_view chunk = rest.substr(0, next);
    rest = next == std::string_view::npos ? std::string_view() : rest.substr(next);

    const std::size_t body_end = chunk.find('\x1d');
    if (body_end == std::string_view::npos) throw IngestError("unexpected git log output");
    std::string_view header = chunk.substr(0, body_end);
    std::vector<std::string_view> fields;
    for (int i = 0; i < 3; ++i) {
      const std::size_t sep = header.find('\x1f');
      if (sep == std::string_view::npos) throw IngestError("unexpected git log output");
      fields.push_back(header.substr(0, sep));
      header.remove_prefix(sep + 1);
    }
    CommitRecord c;
    c.sha1 = std::string(fields[0]);
    c.date = format_utc_timestamp(std::stoll(std::string(fields[1])));
    c.author_name = std::string(fields[2]);
    std::string_view message = header;
    while (!message.empty() && (message.back() == '\n' || message.back() == '\r')) message.remove_suffix(1);
    c.message = std::string(message);
    parse_shortstat(chunk.substr(body_end + 1), c);
    out[c.sha1] = std::move(c);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<const CodeElement*> primary_elements(const std::vector<CodeElement>& side) {
  std::vector<const CodeElement*> out;
  for (const auto& e : side) {
    const std::string role = lower(e.role);
    const bool declaration = role.find("declaration") != std::string::npos &&
                             role.find("code from") == std::string::npos &&
                             role.find("code to") == std::string::npos &&
                             role.find("invocation") == std::string::npos;
    if (declaration || e.role == "nodeBefore" || e.role == "nodeAfter") out.push_back(&e);
  }
  if (out.empty() && !side.empty()) out.push_back(&side.front());
  return out;
}

bool is_extract_method_type(std::string_view type) {
  return type == "Extract Method" || type == "Extract And Move Method";
}

std::optional<ExtractMethodInfo> derive_extract_method_fields(const DetectorRecord& record) {
  if (!is_extract_method_type(record.type)) return std::nullopt;
  const auto sources = primary_elements(record.left);
  const auto targets = primary_elements(record.right);
  if (sources.empty() || targets.empty() || !targets.front()->has_span()) return std::nullopt;

  std::set<std::tuple<std::string, std::string, std::int64_t, std::int64_t>> distinct;
  ExtractMethodInfo info;
  for (const CodeElement* e : sources) {
    if (!e->has_span()) return std::nullopt;
    distinct.emplace(e->name, e->file, *e->begin_line, *e->end_line);
    info.source_method_lines = std::max(info.source_method_lines, e->lines());
  }
  info.source_methods_count = static_cast<std::int64_t>(distinct.size());
  info.extracted_lines = targets.front()->lines();
  return info;
}

std::string simple_identifier(std::string_view name) {
  name = name.substr(0, name.find('('));
  name = name.substr(0, name.find(" : "));
  name = trim(name);
  if (auto space = name.find_last_of(" \t"); space != std::string_view::npos) name = name.substr(space + 1);
  if (auto dot = name.rfind('.'); dot != std::string_view::npos) name = name.substr(dot + 1);
  return std::string(name);
}

std::optional<RenameInfo> derive_rename_fields(const DetectorRecord& record) {
  if (record.type.rfind("Rename", 0) != 0) return std::nullopt;
  const auto left = primary_elements(record.left);
  const auto right = primary_elements(record.right);
  if (left.empty() || right.empty()) return std::nullopt;
  RenameInfo info{simple_identifier(left.front()->name), simple_identifier(right.front()->name)};
  if (info.from.empty() || info.to.empty()) return std::nullopt;
  return info;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<CodeFragmentRef> fragment_of(const std::vector<CodeElement>& side) {
  const auto primary = primary_elements(side);
  if (primary.empty()) return std::nullopt;
  const CodeElement& e = *primary.front();
  CodeFragmentRef f;
  f.name = e.name;
  f.location.file = e.file;
  if (e.has_span()) {
    f.location.begin = e.begin_line;
    f.location.end = e.end_line;
    f.location.lines = e.lines();
  }
  return f;
}

}  // namespace

ConvertResult convert(const std::vector<DetectorRecord>& records, const CommitMap& commits,
                      std::string_view repository_url) {
  ConvertResult out;
  const std::string repository = normalize_repository_url(repository_url);
  std::unordered_set<std::string> seen;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const DetectorRecord& r = records[i];
    auto reject = [&](const std::string& why) {
      ++out.rejected;
      out.rejections.push_back(r.tool + " record #" + std::to_string(i) + " (" + r.commit_sha1 + "): " + why);
    };
    auto commit = commits.find(r.commit_sha1);
    if (commit == commits.end()) {
      reject("no metadata for commit");
      continue;
    }

    RefactoringCase c;
    c.type = r.type;
    c.description = r.description;
    c.repository = repository;
    c.tool = r.tool;
    c.before = fragment_of(r.left);
    c.after = fragment_of(r.right);
    c.commit.sha1 = commit->second.sha1;
    c.commit.date = commit->second.date;
    c.commit.message = commit->second.message;
    c.commit.author_name = commit->second.author_name;
    c.commit.files_changed = commit->second.files_changed;
    c.commit.lines_inserted = commit->second.lines_inserted;
    c.commit.lines_deleted = commit->second.lines_deleted;
    c.extract_method = derive_extract_method_fields(r);
    c.rename = derive_rename_fields(r);
    try {
      c.id = case_id(c);
    } catch (const std::invalid_argument& e) {
      reject(e.what());
      continue;
    }
    if (auto problems = validate_case(c); !problems.empty()) {
      std::string why = problems.front();
      for (std::size_t p = 1; p < problems.size(); ++p) why += "; " + problems[p];
      reject(why);
      continue;
    }
    if (!seen.insert(c.id).second) {
      ++out.duplicates;
      continue;
    }
    out.cases.push_back(std::move(c));
  }

  std::map<std::pair<std::string, std::string>, std::int64_t> totals;
  for (const auto& c : out.cases) ++totals[{c.commit.sha1, c.tool}];
  for (auto& c : out.cases) c.commit.refactorings_total = totals[{c.commit.sha1, c.tool}];
  return out;
}

}  // namespace refsearch
