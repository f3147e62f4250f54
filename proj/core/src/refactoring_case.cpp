#include "refsearch/refactoring_case.hpp"

#include <array>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <openssl/evp.h>

namespace refsearch {

namespace {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

void append_part(std::string& out, std::string_view part) {
  out += std::to_string(part.size());
  out += ':';
  out += part;
}

// --- wire decoding helpers -------------------------------------------------

// Removes `key` from `obj` and returns it, or nullopt when absent or null.
std::optional<json> take(json& obj, const char* key) {
  if (!obj.is_object()) return std::nullopt;
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  json value = std::move(*it);
  obj.erase(it);
  if (value.is_null()) return std::nullopt;
  return value;
}

std::optional<std::string> take_string(json& obj, const char* key, const std::string& where) {
  auto v = take(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw CaseFormatError(where + ": expected string, got " + v->type_name());
  return v->get<std::string>();
}

std::optional<std::int64_t> take_int(json& obj, const char* key, const std::string& where) {
  auto v = take(obj, key);
  if (!v) return std::nullopt;
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_number_float()) {
    const double d = v->get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  throw CaseFormatError(where + ": expected integer, got " + std::string(v->type_name()));
}

// Child object of `obj` under `key` for further taking. Non-object values are
// a type mismatch because the key is a known container.
json* child(json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  if (!it->is_object()) throw CaseFormatError(where + ": expected object, got " + std::string(it->type_name()));
  return &*it;
}

void drop_if_empty(json& obj, const char* key) {
  auto it = obj.find(key);
  if (it != obj.end() && ((it->is_object() && it->empty()) || it->is_null())) obj.erase(it);
}

std::optional<CodeFragmentRef> take_fragment(json& root, const char* key) {
  const std::string base = key;
  json* node = child(root, key, base);
  if (node == nullptr) return std::nullopt;

  bool any = false;
  CodeFragmentRef out;
  if (auto name = take_string(*node, "name", base + ".name")) {
    out.name = *name;
    any = true;
  }
  if (json* loc = child(*node, "location", base + ".location")) {
    const std::string lbase = base + ".location";
    if (auto file = take_string(*loc, "file", lbase + ".file")) {
      out.location.file = *file;
      any = true;
    }
    if (auto lines = take_int(*loc, "lines", lbase + ".lines")) {
      out.location.lines = *lines;
      any = true;
    }
    if (auto begin = take_int(*loc, "begin", lbase + ".begin")) {
      out.location.begin = begin;
      any = true;
    }
    if (auto end = take_int(*loc, "end", lbase + ".end")) {
      out.location.end = end;
      any = true;
    }
    drop_if_empty(*node, "location");
  }
  drop_if_empty(root, key);
  if (!any) return std::nullopt;
  return out;
}

// --- wire encoding helpers ------------------------------------------------------

json& slot(json& root, std::initializer_list<const char*> path) {
  json* node = &root;
  for (const char* segment : path) {
    if (!node->is_object()) *node = json::object();
    node = &(*node)[segment];
  }
  return *node;
}

void put_fragment(json& root, const char* key, const CodeFragmentRef& f) {
  slot(root, {key, "name"}) = f.name;
  slot(root, {key, "location", "file"}) = f.location.file;
  slot(root, {key, "location", "lines"}) = f.location.lines;
  if (f.location.begin) slot(root, {key, "location", "begin"}) = *f.location.begin;
  if (f.location.end) slot(root, {key, "location", "end"}) = *f.location.end;
}

// --- time ------------------------------------------------------------------------

struct ParsedTime {
  std::int64_t epoch = 0;
  std::string fraction;  // digits after '.', possibly empty
};

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  out = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

// Parses YYYY-MM-DDTHH:MM:SS[.f+](Z|+HH:MM|-HH:MM). `require_z` rejects offsets.
std::optional<ParsedTime> parse_timestamp(std::string_view s, bool require_z) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (s.size() < 20) return std::nullopt;
  if (!read_digits(s, 0, 4, year) || s[4] != '-' || !read_digits(s, 5, 2, month) || s[7] != '-' ||
      !read_digits(s, 8, 2, day) || s[10] != 'T' || !read_digits(s, 11, 2, hour) || s[13] != ':' ||
      !read_digits(s, 14, 2, minute) || s[16] != ':' || !read_digits(s, 17, 2, second)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day date{std::chrono::year(year), std::chrono::month(static_cast<unsigned>(month)),
                                        std::chrono::day(static_cast<unsigned>(day))};
  if (!date.ok() || hour > 23 || minute > 59 || second > 60) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  ParsedTime out;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') out.fraction += s[pos++];
    if (out.fraction.empty()) return std::nullopt;
  }
  std::int64_t offset_seconds = 0;
  if (pos < s.size() && s[pos] == 'Z') {
    ++pos;
  } else if (!require_z && pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    int oh = 0, om = 0;
    if (!read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !read_digits(s, pos + 4, 2, om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset_seconds = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  out.epoch = std::chrono::sys_days(date).time_since_epoch().count() * std::int64_t{86400} + hour * 3600 + minute * 60 + second - offset_seconds;
  return out;
}

}  // namespace

std::string case_id(const RefactoringCase& c) {
  if (c.type.empty() || c.repository.empty() || c.commit.sha1.empty() || c.tool.empty()) {
    throw std::invalid_argument("case_id needs type, repository, commit.sha1 and meta.tool");
  }
  std::string material;
  append_part(material, c.repository);
  append_part(material, c.commit.sha1);
  append_part(material, c.tool);
  append_part(material, c.type);
  append_part(material, c.description);
  append_part(material, c.before ? std::string_view(c.before->name) : std::string_view());
  append_part(material, c.after ? std::string_view(c.after->name) : std::string_view());
  return sha256_hex(material).substr(0, 40);
}

std::vector<std::string> validate_case(const RefactoringCase& c) {
  std::vector<std::string> v;
  if (c.type.empty()) v.emplace_back("type must be non-empty");
  if (c.repository.empty()) {
    v.emplace_back("repository must be non-empty");
  } else if (normalize_repository_url(c.repository) != c.repository) {
    v.emplace_back("repository must not end with '/' or '.git'");
  }
  if (c.tool.empty()) v.emplace_back("meta.tool must be non-empty");
  if (!is_hex_sha1(c.commit.sha1)) v.emplace_back("commit.sha1 must be 40 hex chars");
  if (!is_iso8601_utc(c.commit.date)) v.emplace_back("commit.date must be an ISO-8601 UTC timestamp");
  if (c.commit.files_changed < 0) v.emplace_back("commit.size.files.changed must be >= 0");
  if (c.commit.lines_inserted < 0) v.emplace_back("commit.size.lines.inserted must be >= 0");
  if (c.commit.lines_deleted < 0) v.emplace_back("commit.size.lines.deleted must be >= 0");
  if (c.commit.refactorings_total < 1) v.emplace_back("commit.refactorings.total must be >= 1");

  auto check_fragment = [&v](const std::optional<CodeFragmentRef>& f, const std::string& side) {
    if (!f) return;
    const Location& loc = f->location;
    if (loc.lines < 0) v.push_back(side + ".location.lines must be >= 0");
    if (loc.begin.has_value() != loc.end.has_value()) {
      v.push_back(side + ".location.begin and end must be given together");
    } else if (loc.begin) {
      if (*loc.begin < 1) v.push_back(side + ".location.begin must be >= 1");
      if (*loc.begin > *loc.end) {
        v.push_back(side + ".location span out of order: begin > end");
      } else if (loc.lines != *loc.end - *loc.begin + 1) {
        v.push_back(side + ".location.lines must equal end - begin + 1");
      }
    }
  };
  check_fragment(c.before, "before");
  check_fragment(c.after, "after");

  if (c.extract_method) {
    if (c.extract_method->source_methods_count < 1) v.emplace_back("extractMethod.sourceMethodsCount must be >= 1");
    if (c.extract_method->source_method_lines < 0) v.emplace_back("extractMethod.sourceMethodLines must be >= 0");
    if (c.extract_method->extracted_lines < 0) v.emplace_back("extractMethod.extractedLines must be >= 0");
  }
  if (c.rename) {
    for (const auto& [name, value] : {std::pair{"rename.from", &c.rename->from}, {"rename.to", &c.rename->to}}) {
      if (value->empty()) v.push_back(std::string(name) + " must be non-empty");
      if (value->find('(') != std::string::npos) v.push_back(std::string(name) + " must not contain '('");
    }
  }

  bool id_computable = !c.type.empty() && !c.repository.empty() && !c.commit.sha1.empty() && !c.tool.empty();
  if (id_computable && c.id != case_id(c)) v.emplace_back("id does not match the case content");
  return v;
}

nlohmann::json to_json(const RefactoringCase& c) {
  json out = c.extra.is_object() ? c.extra : json::object();
  out["id"] = c.id;
  out["type"] = c.type;
  out["description"] = c.description;
  out["repository"] = c.repository;
  if (c.before) put_fragment(out, "before", *c.before);
  if (c.after) put_fragment(out, "after", *c.after);
  slot(out, {"commit", "sha1"}) = c.commit.sha1;
  slot(out, {"commit", "date"}) = c.commit.date;
  slot(out, {"commit", "message"}) = c.commit.message;
  slot(out, {"commit", "authorName"}) = c.commit.author_name;
  slot(out, {"commit", "size", "files", "changed"}) = c.commit.files_changed;
  slot(out, {"commit", "size", "lines", "inserted"}) = c.commit.lines_inserted;
  slot(out, {"commit", "size", "lines", "deleted"}) = c.commit.lines_deleted;
  slot(out, {"commit", "refactorings", "total"}) = c.commit.refactorings_total;
  if (c.extract_method) {
    slot(out, {"extractMethod", "sourceMethodsCount"}) = c.extract_method->source_methods_count;
    slot(out, {"extractMethod", "sourceMethodLines"}) = c.extract_method->source_method_lines;
    slot(out, {"extractMethod", "extractedLines"}) = c.extract_method->extracted_lines;
  }
  if (c.rename) {
    slot(out, {"rename", "from"}) = c.rename->from;
    slot(out, {"rename", "to"}) = c.rename->to;
  }
  slot(out, {"meta", "tool"}) = c.tool;
  return out;
}

RefactoringCase case_from_json(const nlohmann::json& input) {
  if (!input.is_object()) throw std::invalid_argument("a refactoring case must be a JSON object");
  json rest = input;
  RefactoringCase c;
  c.id = take_string(rest, "id", "id").value_or("");
  c.type = take_string(rest, "type", "type").value_or("");
  c.description = take_string(rest, "description", "description").value_or("");
  c.repository = take_string(rest, "repository", "repository").value_or("");
  c.before = take_fragment(rest, "before");
  c.after = take_fragment(rest, "after");

  if (json* commit = child(rest, "commit", "commit")) {
    c.commit.sha1 = take_string(*commit, "sha1", "commit.sha1").value_or("");
    c.commit.date = take_string(*commit, "date", "commit.date").value_or("");
    c.commit.message = take_string(*commit, "message", "commit.message").value_or("");
    c.commit.author_name = take_string(*commit, "authorName", "commit.authorName").value_or("");
    if (json* size = child(*commit, "size", "commit.size")) {
      if (json* files = child(*size, "files", "commit.size.files")) {
        c.commit.files_changed = take_int(*files, "changed", "commit.size.files.changed").value_or(0);
        drop_if_empty(*size, "files");
      }
      if (json* lines = child(*size, "lines", "commit.size.lines")) {
        c.commit.lines_inserted = take_int(*lines, "inserted", "commit.size.lines.inserted").value_or(0);
        c.commit.lines_deleted = take_int(*lines, "deleted", "commit.size.lines.deleted").value_or(0);
        drop_if_empty(*size, "lines");
      }
      drop_if_empty(*commit, "size");
    }
    if (json* refs = child(*commit, "refactorings", "commit.refactorings")) {
      c.commit.refactorings_total = take_int(*refs, "total", "commit.refactorings.total").value_or(1);
      drop_if_empty(*commit, "refactorings");
    }
    drop_if_empty(rest, "commit");
  }

  if (json* em = child(rest, "extractMethod", "extractMethod")) {
    auto count = take_int(*em, "sourceMethodsCount", "extractMethod.sourceMethodsCount");
    auto source = take_int(*em, "sourceMethodLines", "extractMethod.sourceMethodLines");
    auto extracted = take_int(*em, "extractedLines", "extractMethod.extractedLines");
    if (count || source || extracted) {
      c.extract_method = ExtractMethodInfo{count.value_or(1), source.value_or(0), extracted.value_or(0)};
    }
    drop_if_empty(rest, "extractMethod");
  }
  if (json* rn = child(rest, "rename", "rename")) {
    auto from = take_string(*rn, "from", "rename.from");
    auto to = take_string(*rn, "to", "rename.to");
    if (from || to) c.rename = RenameInfo{from.value_or(""), to.value_or("")};
    drop_if_empty(rest, "rename");
  }
  if (json* meta = child(rest, "meta", "meta")) {
    c.tool = take_string(*meta, "tool", "meta.tool").value_or("");
    drop_if_empty(rest, "meta");
  }
  c.extra = std::move(rest);
  return c;
}

std::string normalize_repository_url(std::string_view url) {
  std::string out(url);
  bool changed = true;
  while (changed) {
    changed = false;
    while (!out.empty() && out.back() == '/') {
      out.pop_back();
      changed = true;
    }
    if (out.size() >= 4 && out.compare(out.size() - 4, 4, ".git") == 0) {
      out.resize(out.size() - 4);
      changed = true;
    }
  }
  return out;
}

std::optional<std::string> commit_url(const RefactoringCase& c) {
  static constexpr std::array<std::string_view, 4> kForges{
      "https://github.com/", "https://gitlab.com/", "http://github.com/", "http://gitlab.com/"};
  for (std::string_view forge : kForges) {
    if (c.repository.starts_with(forge) && c.repository.size() > forge.size() && is_hex_sha1(c.commit.sha1)) {
      return c.repository + "/commit/" + c.commit.sha1;
    }
  }
  return std::nullopt;
}

bool is_hex_sha1(std::string_view text) {
  if (text.size() != 40) return false;
  for (char ch : text) {
    if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) return false;
  }
  return true;
}

bool is_iso8601_utc(std::string_view text) { return parse_timestamp(text, true).has_value(); }

std::optional<std::string> normalize_iso8601_utc(std::string_view text) {
  auto parsed = parse_timestamp(text, false);
  if (!parsed) return std::nullopt;
  std::string out = format_utc_timestamp(parsed->epoch);
  if (!parsed->fraction.empty()) {
    out.pop_back();
    out += '.' + parsed->fraction + 'Z';
  }
  return out;
}

std::string format_utc_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds(epoch_seconds)};
  const sys_days day = floor<days>(tp);
  const year_month_day ymd(day);
  const hh_mm_ss<seconds> tod(tp - day);
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()));
  return std::string(buf.data());
}

}  // namespace refsearch
