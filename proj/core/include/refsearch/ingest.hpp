#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "refsearch/refactoring_case.hpp"

namespace refsearch {

/// Malformed detector output or commit source.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kRefactoringMiner = "RefactoringMiner";
inline constexpr std::string_view kRefDiff = "RefDiff";

struct CodeElement {
  std::string role;  // e.g. "source method declaration before extraction"
  std::string name;
  std::string file;
  std::optional<std::int64_t> begin_line;
  std::optional<std::int64_t> end_line;

  bool has_span() const { return begin_line && end_line; }
  std::int64_t lines() const { return has_span() ? *end_line - *begin_line + 1 : 0; }

  friend bool operator==(const CodeElement&, const CodeElement&) = default;
};

/// One refactoring as reported by a detector, before normalization.
struct DetectorRecord {
  std::string tool;
  std::string commit_sha1;
  std::string type;
  std::string description;
  std::vector<CodeElement> left;
  std::vector<CodeElement> right;
  nlohmann::json raw;
};

struct ParsedDetectorOutput {
  std::vector<DetectorRecord> records;
  /// Every commit listed by the detector, including ones without findings.
  std::set<std::string> commits;
  std::size_t rejected = 0;
  std::vector<std::string> rejections;
};

/// RefactoringMiner export: {"commits":[{"sha1", "refactorings":[{"type",
/// "description", "leftSideLocations":[...], "rightSideLocations":[...]}]}]}.
/// Throws IngestError when the document is not in that shape or a commit has
/// no sha1; entries without a type are rejected one by one.
ParsedDetectorOutput parse_rminer_output(const nlohmann::json& doc);

/// RefDiff export: {"commits":[{"sha1", "relationships":[{"type", "nodeBefore",
/// "nodeAfter"}]}]} or a bare array of relationships that each carry "commit".
/// Nodes have "type", "localName" and "location":{"file","beginLine","endLine"}.
ParsedDetectorOutput parse_refdiff_output(const nlohmann::json& doc);

/// Parses text as detector output of `tool` (RefactoringMiner or RefDiff,
/// case-insensitive).
ParsedDetectorOutput parse_detector_output(std::string_view tool, std::string_view text);

/// Canonical detector name for `tool`, or nullopt when no parser exists.
std::optional<std::string> canonical_tool(std::string_view tool);

/// Maps a RefDiff relationship type on a node type to the shared type
/// vocabulary ("EXTRACT" -> "Extract Method"); unknown kinds pass through.
std::string translate_refdiff_type(std::string_view relationship, std::string_view node_type);

struct CommitRecord {
  std::string sha1;
  std::string date;  // ISO-8601 UTC
  std::string message;
  std::string author_name;
  std::int64_t files_changed = 0;
  std::int64_t lines_inserted = 0;
  std::int64_t lines_deleted = 0;

  friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

using CommitMap = std::map<std::string, CommitRecord>;

nlohmann::json to_json(const CommitRecord& commit);
/// Throws IngestError when a field is missing or has the wrong type.
CommitRecord commit_from_json(const nlohmann::json& json);

/// One CommitRecord per line; blank lines are skipped. Throws IngestError
/// naming the offending line.
CommitMap read_commits_jsonl(const std::filesystem::path& path);

/// Every commit reachable from any ref of the clone at `clone_path`, with
/// author date, full message and shortstat counters (renames off, merges
/// diffed against their first parent). Throws IngestError.
CommitMap read_git_history(const std::filesystem::path& clone_path);

/// Elements that denote the refactored declaration itself rather than moved
/// code fragments or invocations.
std::vector<const CodeElement*> primary_elements(const std::vector<CodeElement>& side);

bool is_extract_method_type(std::string_view type);

std::optional<ExtractMethodInfo> derive_extract_method_fields(const DetectorRecord& record);
std::optional<RenameInfo> derive_rename_fields(const DetectorRecord& record);

/// "public getName(int x) : String" -> "getName"; "org.a.Foo" -> "Foo".
std::string simple_identifier(std::string_view name);

struct ConvertResult {
  std::vector<RefactoringCase> cases;
  std::size_t duplicates = 0;  // records that collapsed onto an earlier id
  std::size_t rejected = 0;
  std::vector<std::string> rejections;
};

/// Builds validated cases from detector records. Records whose commit is not
/// in `commits` or that fail validation are rejected with a reason.
ConvertResult convert(const std::vector<DetectorRecord>& records, const CommitMap& commits,
                      std::string_view repository_url);

}  // namespace refsearch
