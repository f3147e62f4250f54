#include "oracle.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cctype>
#include <charconv>
#include <regex>

namespace oracle {

using nlohmann::json;
using Dec = boost::multiprecision::cpp_dec_float_50;

ExprPtr cmp(std::vector<std::string> path, std::string op, Lit lit) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Cmp;
  e->path = std::move(path);
  e->op = std::move(op);
  e->lit = std::move(lit);
  return e;
}

ExprPtr conj(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::And;
  e->left = std::move(a);
  e->right = std::move(b);
  return e;
}

ExprPtr disj(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Or;
  e->left = std::move(a);
  e->right = std::move(b);
  return e;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string render_lit(const Lit& l) {
  switch (l.kind) {
    case Lit::Num:
      return l.text;
    case Lit::Regex:
      return "/" + l.text + "/" + (l.icase ? "i" : "");
    case Lit::Str:
      return l.bare ? l.text : quote(l.text);
  }
  return {};
}

std::string join(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& s : path) out += (out.empty() ? "" : ".") + s;
  return out;
}

std::string paren(const std::string& s) { return "(" + s + ")"; }

// JSON number -> exact decimal via its shortest round-trip text.
Dec to_dec(const json& v) {
  if (v.is_number_integer()) return Dec(std::to_string(v.get<std::int64_t>()));
  if (v.is_number_unsigned()) return Dec(std::to_string(v.get<std::uint64_t>()));
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v.get<double>());
  return Dec(std::string(buf.data(), res.ptr));
}

Dec lexeme_dec(const std::string& lexeme) {
  // cpp_dec_float does not take a leading '+'.
  return Dec(lexeme.front() == '+' ? lexeme.substr(1) : lexeme);
}

void leaves(const json& v, const std::vector<std::string>& path, std::size_t i, std::vector<const json*>& out) {
  if (v.is_array()) {
    for (const auto& e : v) leaves(e, path, i, out);
    return;
  }
  if (i == path.size()) {
    out.push_back(&v);
    return;
  }
  if (v.is_object()) {
    auto it = v.find(path[i]);
    if (it != v.end()) leaves(*it, path, i + 1, out);
  }
}

bool leaf_match(const json& v, const std::string& op, const Lit& lit) {
  if (op == "=") {
    if (v.is_number() && lit.kind == Lit::Num) return to_dec(v) == lexeme_dec(lit.text);
    if (v.is_string() && lit.kind != Lit::Regex) return v.get<std::string>() == lit.text;
    return false;
  }
  if (op == "~") {
    if (!v.is_string()) return false;
    auto flags = std::regex::ECMAScript;
    if (lit.kind == Lit::Regex && lit.icase) flags |= std::regex::icase;
    return std::regex_search(v.get<std::string>(), std::regex(lit.text, flags));
  }
  int order = 0;
  if (v.is_number() && lit.kind == Lit::Num) {
    const Dec a = to_dec(v);
    const Dec b = lexeme_dec(lit.text);
    order = a < b ? -1 : (a > b ? 1 : 0);
  } else if (v.is_string() && lit.kind == Lit::Str) {
    const int c = v.get<std::string>().compare(lit.text);
    order = c < 0 ? -1 : (c > 0 ? 1 : 0);
  } else {
    return false;
  }
  if (op == "<") return order < 0;
  if (op == "<=") return order <= 0;
  if (op == ">") return order > 0;
  return order >= 0;
}

bool eval_cmp(const Expr& e, const json& doc) {
  std::vector<const json*> values;
  leaves(doc, e.path, 0, values);
  const std::string op = e.op == "!=" ? "=" : e.op;
  bool any = false;
  for (const json* v : values) {
    if (leaf_match(*v, op, e.lit)) {
      any = true;
      break;
    }
  }
  return e.op == "!=" ? !any : any;
}

}  // namespace

std::string render(const ExprPtr& e, bool minimal) {
  switch (e->kind) {
    case Expr::Cmp:
      return join(e->path) + " " + e->op + " " + render_lit(e->lit);
    case Expr::Or: {
      std::string l = render(e->left, minimal);
      std::string r = render(e->right, minimal);
      if (!minimal) return paren(l + " | " + r);
      if (e->left->kind == Expr::Or) l = paren(l);
      return l + " | " + r;
    }
    case Expr::And: {
      std::string l = render(e->left, minimal);
      std::string r = render(e->right, minimal);
      if (!minimal) return paren(l + " & " + r);
      if (e->left->kind != Expr::Cmp) l = paren(l);
      if (e->right->kind == Expr::Or) r = paren(r);
      return l + " & " + r;
    }
  }
  return {};
}

bool eval(const ExprPtr& e, const json& doc) {
  switch (e->kind) {
    case Expr::Cmp:
      return eval_cmp(*e, doc);
    case Expr::And:
      return eval(e->left, doc) && eval(e->right, doc);
    case Expr::Or:
      return eval(e->left, doc) || eval(e->right, doc);
  }
  return false;
}

std::vector<std::string> ordered_ids(const std::vector<json>& docs, const std::vector<std::string>& path,
                                     bool descending) {
  struct Key {
    int rank = -1;  // -1 missing
    Dec num;
    std::string str;
    bool flag = false;
    std::string id;
  };
  std::vector<Key> keys;
  for (const auto& d : docs) {
    Key k;
    k.id = d.at("id").get<std::string>();
    const json* v = &d;
    for (const auto& seg : path) {
      if (v->is_array()) break;
      if (!v->is_object() || !v->contains(seg)) {
        v = nullptr;
        break;
      }
      v = &(*v)[seg];
    }
    if (v != nullptr && !v->is_null()) {
      if (v->is_number()) {
        k.rank = 0;
        k.num = to_dec(*v);
      } else if (v->is_string()) {
        k.rank = 1;
        k.str = v->get<std::string>();
      } else if (v->is_boolean()) {
        k.rank = 2;
        k.flag = v->get<bool>();
      } else {
        k.rank = v->is_array() ? 3 : 4;
      }
    }
    keys.push_back(std::move(k));
  }
  auto key_cmp = [](const Key& a, const Key& b) {
    if (a.rank != b.rank) return a.rank < b.rank ? -1 : 1;
    if (a.rank == 0) return a.num < b.num ? -1 : (a.num > b.num ? 1 : 0);
    if (a.rank == 1) return a.str < b.str ? -1 : (a.str > b.str ? 1 : 0);
    if (a.rank == 2) return a.flag == b.flag ? 0 : (a.flag ? 1 : -1);
    return 0;
  };
  std::sort(keys.begin(), keys.end(), [&](const Key& a, const Key& b) {
    const bool am = a.rank < 0;
    const bool bm = b.rank < 0;
    if (am != bm) return bm;
    if (!am) {
      const int c = key_cmp(a, b);
      if (c != 0) return descending ? c > 0 : c < 0;
    }
    return a.id < b.id;
  });
  std::vector<std::string> out;
  for (const auto& k : keys) out.push_back(k.id);
  return out;
}

std::vector<std::string> brute_force(const ExprPtr& e, const std::vector<json>& docs) {
  std::vector<json> hits;
  for (const auto& d : docs) {
    if (eval(e, d)) hits.push_back(d);
  }
  return ordered_ids(hits, {"commit", "date"}, true);
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kTypes{"Extract Method", "Rename Method", "Move Class", "Inline Method",
                                      "Rename Variable", "Extract method", "5"};
const std::vector<std::string> kMessages{"Extract helper from Foo", "Polish `NamedObjectInstantiator`",
                                         "EXTRACT constants",       "rename getters",
                                         "Fix build",               "extracting common code",
                                         "Merge branch 'main'",     "a/b path \"quoted\" message"};
const std::vector<std::string> kNames{"getName()", "retrieveName()", "loaderFor(Class)", "validate(Class)",
                                      "Foo",       "Bar",            "getX(int)",        "compute"};
const std::vector<std::string> kTags{"perf", "api", "5", "07", "legacy", "Test"};

template <class R>
const std::string& pick(R& rng, const std::vector<std::string>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::string hex40(std::mt19937_64& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(40, '0');
  for (auto& c : s) c = kHex[rng() % 16];
  return s;
}

}  // namespace

std::vector<json> corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<json> docs;
  for (std::size_t i = 0; i < n; ++i) {
    json d;
    d["type"] = pick(rng, kTypes);
    d["description"] = "case " + std::to_string(i) + " " + pick(rng, kNames);
    d["repository"] = "https://github.com/org/repo" + std::to_string(uni(0, 4));
    char date[32];
    std::snprintf(date, sizeof date, "20%02d-%02d-%02dT%02d:%02d:%02dZ", uni(15, 23), uni(1, 12), uni(1, 28),
                  uni(0, 23), uni(0, 59), uni(0, 59));
    d["commit"]["date"] = date;
    // A few shared dates exercise the id tie-break.
    if (uni(0, 9) == 0) d["commit"]["date"] = "2020-01-01T00:00:00Z";
    d["commit"]["sha1"] = hex40(rng);
    d["commit"]["message"] = pick(rng, kMessages);
    d["commit"]["authorName"] = uni(0, 1) ? "Alice" : "Bob";
    d["commit"]["size"]["files"]["changed"] = uni(0, 30);
    d["commit"]["size"]["lines"]["inserted"] = uni(0, 500);
    d["commit"]["size"]["lines"]["deleted"] = uni(0, 500);
    d["commit"]["refactorings"]["total"] = uni(1, 9);
    d["meta"]["tool"] = uni(0, 1) ? "RefactoringMiner" : "RefDiff";
    for (const char* side : {"before", "after"}) {
      if (uni(0, 4) == 0) continue;
      const int begin = uni(1, 300);
      const int lines = uni(1, 200);
      d[side]["name"] = pick(rng, kNames);
      d[side]["location"] = {{"file", "src/F" + std::to_string(uni(0, 3)) + ".java"},
                             {"lines", lines},
                             {"begin", begin},
                             {"end", begin + lines - 1}};
    }
    if (d["type"] == "Extract Method" && uni(0, 3) != 0) {
      d["extractMethod"] = {{"sourceMethodsCount", uni(1, 3)},
                            {"sourceMethodLines", uni(1, 300)},
                            {"extractedLines", uni(1, 150)}};
    }
    if (uni(0, 3) == 0) d["rename"] = {{"from", uni(0, 1) ? "getName" : "GetValue"}, {"to", "retrieveName"}};

    switch (uni(0, 7)) {
      case 0:
        d["score"] = uni(-5, 20);
        break;
      case 1:
        d["score"] = uni(-40, 40) / 4.0;
        break;
      case 2:
        d["score"] = std::to_string(uni(0, 10));
        break;
      case 3:
        d["score"] = nullptr;
        break;
      case 4:
        d["score"] = uni(0, 1) == 1;
        break;
      case 5:
        d["score"] = json::array({uni(0, 10), uni(0, 10)});
        break;
      default:
        break;  // missing
    }
    switch (uni(0, 4)) {
      case 0:
        break;
      case 1:
        d["tags"] = json::array();
        break;
      case 2:
        d["tags"] = json::array({json::array({pick(rng, kTags)}), pick(rng, kTags)});
        break;
      default: {
        json tags = json::array();
        for (int t = uni(1, 3); t > 0; --t) tags.push_back(pick(rng, kTags));
        d["tags"] = tags;
      }
    }
    if (uni(0, 1)) {
      json items = json::array();
      for (int t = uni(0, 3); t > 0; --t) {
        json item{{"name", pick(rng, kNames)}};
        if (uni(0, 3) != 0) item["n"] = uni(0, 9);
        items.push_back(item);
      }
      d["items"] = items;
    }
    if (uni(0, 2) == 0) d["flag"] = uni(0, 1) == 1;
    if (uni(0, 3) == 0) d["note"] = uni(0, 1) ? json(nullptr) : json("see #12");
    docs.push_back(std::move(d));
  }
  return docs;
}

// ---------------------------------------------------------------------------

namespace {

struct PathSpec {
  std::vector<std::string> path;
  std::vector<std::string> strings;
  std::vector<std::string> numbers;
  std::vector<std::string> patterns;
};

const std::vector<PathSpec>& path_specs() {
  static const std::vector<PathSpec> specs{
      {{"type"}, kTypes, {"5", "5.0", "+5"}, {"^Extract", "Method$", "^Rename", "extract", "^[0-9]+$"}},
      {{"repository"},
       {"https://github.com/org/repo1", "https://github.com/org/repo3", "https://github.com/org"},
       {"1"},
       {"repo[12]$", "^https://"}},
      {{"commit", "date"},
       {"2019-06-01", "2020-01-01T00:00:00Z", "2021", "2023-12-31T23:59:59Z", "2017-03-04T05:06:07Z"},
       {"2020", "0"},
       {"^2020", "-0[1-3]-", "Z$"}},
      {{"commit", "message"}, kMessages, {"5"}, {"extract", "^Fix", "b.*a", "quot", "[A-Z]{3,}"}},
      {{"meta", "tool"}, {"RefDiff", "RefactoringMiner", "refdiff"}, {"1"}, {"^Ref", "diff"}},
      {{"before", "name"}, kNames, {"5"}, {"^get", "\\(Class\\)", "^[a-z]+$"}},
      {{"after", "location", "lines"}, {"10", "abc"}, {"10", "100", "50.5", "-1", "0"}, {"1"}},
      {{"extractMethod", "sourceMethodLines"}, {"100"}, {"100", "150", "0", "299.99"}, {"."}},
      {{"extractMethod", "extractedLines"}, {"10"}, {"10", "75"}, {"1"}},
      {{"rename", "from"}, {"getName", "GetValue", "get"}, {"1"}, {"^get", "name$"}},
      {{"score"}, {"5", "7", "true", "null"}, {"5", "5.0", "2.5", "-1.25", "0", "+3", "10", "007"}, {"^[0-9]$", "1"}},
      {{"tags"}, kTags, {"5", "7", "07"}, {"^l", "e", "^[0-9]+$"}},
      {{"items", "name"}, kNames, {"1"}, {"^get", "Class"}},
      {{"items", "n"}, {"3", "x"}, {"3", "0", "9", "4.5"}, {"."}},
      {{"flag"}, {"true", "false"}, {"1", "0"}, {"true"}},
      {{"note"}, {"see #12", "null"}, {"12"}, {"#"}},
      {{"commit", "size", "files", "changed"}, {"2"}, {"2", "15", "30"}, {"1"}},
      {{"nonexistent", "path"}, {"x"}, {"1"}, {"x"}},
  };
  return specs;
}

bool bare_safe(const std::string& s) {
  if (s.empty() || s[0] == '/') return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.' || c == '#')) {
      return false;
    }
  }
  // Must not look like a number, or it would lex as one.
  static const std::regex numeric("[+-]?[0-9]+(\\.[0-9]+)?");
  return !std::regex_match(s, numeric);
}

}  // namespace

ExprPtr QueryGen::comparison() {
  const auto& specs = path_specs();
  const PathSpec& spec = specs[static_cast<std::size_t>(uniform(0, static_cast<int>(specs.size()) - 1))];
  static const std::vector<std::string> ops{"=", "=", "=", "!=", "~", "~", "<", "<=", ">", ">="};
  const std::string op = ops[static_cast<std::size_t>(uniform(0, static_cast<int>(ops.size()) - 1))];
  auto any = [&](const std::vector<std::string>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; };

  Lit lit;
  if (op == "~") {
    const int k = uniform(0, 5);
    if (k == 0) {
      lit.kind = Lit::Str;  // a quoted string used as a pattern
      lit.text = any(spec.patterns);
    } else {
      lit.kind = Lit::Regex;
      lit.text = any(spec.patterns);
      lit.icase = uniform(0, 2) == 0;
    }
  } else if (uniform(0, 1) == 0 && !spec.numbers.empty()) {
    lit.kind = Lit::Num;
    lit.text = any(spec.numbers);
  } else {
    lit.kind = Lit::Str;
    lit.text = any(spec.strings);
    lit.bare = bare_safe(lit.text) && uniform(0, 1) == 0;
  }
  return cmp(spec.path, op, lit);
}

ExprPtr QueryGen::query(int max_depth) {
  if (max_depth <= 0 || uniform(0, 2) == 0) return comparison();
  ExprPtr l = query(max_depth - 1);
  ExprPtr r = query(max_depth - 1);
  return uniform(0, 1) ? conj(l, r) : disj(l, r);
}

ExprPtr QueryGen::indexable(int max_depth) {
  auto any = [&](const std::vector<std::string>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; };
  Lit lit;
  lit.kind = Lit::Str;
  ExprPtr leaf;
  switch (uniform(0, 2)) {
    case 0:
      lit.text = any(kTypes);
      leaf = cmp({"type"}, "=", lit);
      break;
    case 1:
      lit.text = any({"https://github.com/org/repo1", "https://github.com/org/repo2", "https://github.com/org/repo3"});
      leaf = cmp({"repository"}, "=", lit);
      break;
    default:
      lit.text = any({"2016", "2018-06-01", "2020-01-01T00:00:00Z", "2021-07", "2023"});
      leaf = cmp({"commit", "date"}, any({"<", "<=", ">", ">=", "="}), lit);
      break;
  }
  if (max_depth <= 0 || uniform(0, 3) == 0) return leaf;
  return conj(leaf, query(max_depth - 1));
}

}  // namespace oracle
