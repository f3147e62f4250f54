#pragma once

// Query language: lexing, parsing and canonical printing.
//
//   query      = expr
//   expr       = logic [ '|' expr ]
//   logic      = primary [ '&' logic ]
//   primary    = word op word | '(' expr ')'
//   op         = '=' | '!=' | '~' | '<' | '<=' | '>' | '>='
//
// Words are bare runs of visible characters, "double quoted" strings or
// /regex/ literals with an optional `i` flag.

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "refsearch/decimal.hpp"

namespace refsearch {

enum class ComparisonOp { Eq, Neq, Match, Lt, Le, Gt, Ge };

std::string_view op_symbol(ComparisonOp op);
std::optional<ComparisonOp> op_from_symbol(std::string_view symbol);

/// Dotted document path such as `commit.size.files.changed`.
class FieldPath {
 public:
  FieldPath() = default;
  /// Throws std::invalid_argument unless every segment is a valid identifier.
  explicit FieldPath(std::vector<std::string> segments);
  /// Splits at '.'; throws std::invalid_argument on an invalid path.
  static FieldPath parse(std::string_view dotted);
  static bool is_valid_segment(std::string_view segment);

  const std::vector<std::string>& segments() const { return segments_; }
  std::string to_string() const;

  friend bool operator==(const FieldPath&, const FieldPath&) = default;

 private:
  std::vector<std::string> segments_;
};

/// Compiled pattern for `~`. Patterns are restricted to a backtracking-free
/// dialect: no backreferences, lookaround, atomic groups or recursion.
class Matcher {
 public:
  /// Throws std::invalid_argument with a message when the pattern is
  /// malformed or uses an unsupported construct.
  Matcher(std::string_view pattern, bool case_insensitive);
  ~Matcher();
  Matcher(const Matcher&) = delete;
  Matcher& operator=(const Matcher&) = delete;

  /// Unanchored search.
  bool search(std::string_view text) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Returns an error message when `pattern` is outside the supported dialect.
std::optional<std::string> check_regex_dialect(std::string_view pattern);

class Literal {
 public:
  struct Str {
    std::string text;
    friend bool operator==(const Str&, const Str&) = default;
  };
  struct Num {
    Decimal value;
    std::string lexeme;
    friend bool operator==(const Num& a, const Num& b) { return a.lexeme == b.lexeme; }
  };
  struct Regex {
    std::string pattern;
    bool case_insensitive = false;
    friend bool operator==(const Regex&, const Regex&) = default;
  };

  Literal() : value_(Str{}) {}
  static Literal str(std::string text) { return Literal(Str{std::move(text)}); }
  /// Throws std::invalid_argument when `lexeme` is not a numeric word.
  static Literal num(std::string lexeme);
  static Literal regex(std::string pattern, bool case_insensitive = false) {
    return Literal(Regex{std::move(pattern), case_insensitive});
  }

  bool is_str() const { return std::holds_alternative<Str>(value_); }
  bool is_num() const { return std::holds_alternative<Num>(value_); }
  bool is_regex() const { return std::holds_alternative<Regex>(value_); }
  const Str& as_str() const { return std::get<Str>(value_); }
  const Num& as_num() const { return std::get<Num>(value_); }
  const Regex& as_regex() const { return std::get<Regex>(value_); }

  /// Text a string or number literal is compared with, and the pattern
  /// source when the literal is used with `~`.
  const std::string& text() const;

  friend bool operator==(const Literal&, const Literal&) = default;

 private:
  template <class T>
  explicit Literal(T v) : value_(std::move(v)) {}
  std::variant<Str, Num, Regex> value_;
};

/// True for `[+-]?[0-9]+(\.[0-9]+)?`.
bool is_numeric_lexeme(std::string_view word);

struct Comparison {
  FieldPath path;
  ComparisonOp op = ComparisonOp::Eq;
  Literal literal;
  /// Compiled pattern; set for every Match comparison whose pattern compiles.
  std::shared_ptr<const Matcher> matcher;

  /// Builds a comparison and compiles its pattern when `op` is Match.
  /// Throws std::invalid_argument on an invalid path, a regex literal with a
  /// non-`~` operator, or a pattern that does not compile.
  static Comparison make(FieldPath path, ComparisonOp op, Literal literal);

  friend bool operator==(const Comparison& a, const Comparison& b) {
    return a.path == b.path && a.op == b.op && a.literal == b.literal;
  }
};

/// Immutable parse tree. Copies share structure.
class QueryAst {
 public:
  enum class Kind { Or, And, Cmp };

  static QueryAst make_or(QueryAst left, QueryAst right);
  static QueryAst make_and(QueryAst left, QueryAst right);
  static QueryAst make_cmp(Comparison cmp);

  Kind kind() const;
  bool is_cmp() const { return kind() == Kind::Cmp; }
  const QueryAst& left() const;
  const QueryAst& right() const;
  const Comparison& comparison() const;

  friend bool operator==(const QueryAst& a, const QueryAst& b);

 private:
  struct Node;
  explicit QueryAst(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Byte span into the query text that caused the error.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset, std::size_t length)
      : std::runtime_error(message), message_(std::move(message)), offset_(offset), length_(length) {}

  const std::string& message() const { return message_; }
  std::size_t offset() const { return offset_; }
  std::size_t length() const { return length_; }

 private:
  std::string message_;
  std::size_t offset_;
  std::size_t length_;
};

enum class TokenKind { Word, Quoted, Regex, Op, LParen, RParen, Amp, Pipe };

struct Token {
  TokenKind kind;
  /// Decoded value: word text, unescaped string contents, regex pattern or
  /// operator symbol.
  std::string value;
  /// Exact source text of the token.
  std::string lexeme;
  std::size_t offset = 0;
  bool case_insensitive = false;  // regex flag `i`

  friend bool operator==(const Token& a, const Token& b) {
    return a.kind == b.kind && a.value == b.value && a.case_insensitive == b.case_insensitive;
  }
};

/// Throws ParseError on an unterminated quote or regex, or an unknown flag.
std::vector<Token> tokenize(std::string_view input);

/// Throws ParseError.
QueryAst parse_query(std::string_view input);

/// Canonical text: single spaces around operators, strings always quoted,
/// parentheses only where precedence needs them.
std::string format_query(const QueryAst& ast);

}  // namespace refsearch
