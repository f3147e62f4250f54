#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace refsearch {

struct Location {
  std::string file;
  std::int64_t lines = 0;
  /// 1-based inclusive line span, when the detector reports one.
  std::optional<std::int64_t> begin;
  std::optional<std::int64_t> end;

  friend bool operator==(const Location&, const Location&) = default;
};

/// A code element on one side of a refactoring.
struct CodeFragmentRef {
  std::string name;  // with signature where available, e.g. "loaderFor(Class)"
  Location location;

  friend bool operator==(const CodeFragmentRef&, const CodeFragmentRef&) = default;
};

struct CommitMeta {
  std::string sha1;
  std::string date;  // ISO-8601 UTC, "2022-03-17T17:07:34Z"
  std::string message;
  std::string author_name;
  std::int64_t files_changed = 0;
  std::int64_t lines_inserted = 0;
  std::int64_t lines_deleted = 0;
  /// Cases found by the same detector in this commit.
  std::int64_t refactorings_total = 1;

  friend bool operator==(const CommitMeta&, const CommitMeta&) = default;
};

struct ExtractMethodInfo {
  std::int64_t source_methods_count = 1;
  std::int64_t source_method_lines = 0;
  std::int64_t extracted_lines = 0;

  friend bool operator==(const ExtractMethodInfo&, const ExtractMethodInfo&) = default;
};

struct RenameInfo {
  std::string from;
  std::string to;

  friend bool operator==(const RenameInfo&, const RenameInfo&) = default;
};

/// One detected refactoring in the unified document shape.
///
/// On the wire every member lives at its dotted path realised as nested
/// objects (`commit.size.files.changed` -> {"commit":{"size":{"files":...}}}).
/// Keys the schema does not know are kept in `extra`, at their original
/// nesting, and written back verbatim.
struct RefactoringCase {
  std::string id;
  std::string type;
  std::string description;
  std::string repository;
  std::optional<CodeFragmentRef> before;
  std::optional<CodeFragmentRef> after;
  CommitMeta commit;
  std::optional<ExtractMethodInfo> extract_method;
  std::optional<RenameInfo> rename;
  std::string tool;  // meta.tool
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const RefactoringCase&, const RefactoringCase&) = default;
};

/// Raised by case_from_json when a known field has the wrong JSON type.
class CaseFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Content-hash id: SHA-256 over the length-prefixed concatenation of
/// repository, commit.sha1, meta.tool, type, description, before.name and
/// after.name, hex encoded and cut to 40 characters.
/// Throws std::invalid_argument if type, repository, commit.sha1 or meta.tool
/// is empty.
std::string case_id(const RefactoringCase& c);

/// Every invariant violation, empty when the case is valid.
std::vector<std::string> validate_case(const RefactoringCase& c);

nlohmann::json to_json(const RefactoringCase& c);
/// Throws CaseFormatError on a type mismatch, std::invalid_argument when the
/// input is not an object.
RefactoringCase case_from_json(const nlohmann::json& json);

/// Strips trailing '/' and ".git".
std::string normalize_repository_url(std::string_view url);

/// "{repository}/commit/{sha1}" for github.com and gitlab.com repositories.
std::optional<std::string> commit_url(const RefactoringCase& c);

bool is_hex_sha1(std::string_view text);

/// Strict `YYYY-MM-DDTHH:MM:SS[.fraction]Z`.
bool is_iso8601_utc(std::string_view text);

/// Accepts ISO-8601 with `Z` or a `+HH:MM` / `-HH:MM` offset and rewrites it
/// in UTC with a `Z` suffix. nullopt when the text is not a timestamp.
std::optional<std::string> normalize_iso8601_utc(std::string_view text);

/// Seconds since the Unix epoch as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_utc_timestamp(std::int64_t epoch_seconds);

}  // namespace refsearch
