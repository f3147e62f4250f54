#include "refsearch/query.hpp"

#include <array>
#include <stdexcept>

#include <boost/regex.hpp>

namespace refsearch {

namespace {

constexpr std::array<std::pair<ComparisonOp, std::string_view>, 7> kOps{{
    {ComparisonOp::Eq, "="},
    {ComparisonOp::Neq, "!="},
    {ComparisonOp::Match, "~"},
    {ComparisonOp::Lt, "<"},
    {ComparisonOp::Le, "<="},
    {ComparisonOp::Gt, ">"},
    {ComparisonOp::Ge, ">="},
}};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_structural(char c) { return c == '(' || c == ')' || c == '&' || c == '|'; }

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Length of the operator starting at `pos`, 0 if none.
std::size_t operator_length(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  const bool next_eq = pos + 1 < s.size() && s[pos + 1] == '=';
  switch (c) {
    case '=':
    case '~':
      return 1;
    case '<':
    case '>':
      return next_eq ? 2 : 1;
    case '!':
      return next_eq ? 2 : 0;
    default:
      return 0;
  }
}

}  // namespace

std::string_view op_symbol(ComparisonOp op) {
  for (const auto& [kind, symbol] : kOps) {
    if (kind == op) return symbol;
  }
  throw std::logic_error("unknown comparison op");
}

std::optional<ComparisonOp> op_from_symbol(std::string_view symbol) {
  for (const auto& [kind, text] : kOps) {
    if (text == symbol) return kind;
  }
  return std::nullopt;
}

// FieldPath ------------------------------------------------------------------

FieldPath::FieldPath(std::vector<std::string> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("field path must have at least one segment");
  for (const auto& segment : segments_) {
    if (!is_valid_segment(segment)) {
      throw std::invalid_argument("invalid field path segment '" + segment + "'");
    }
  }
  if (segments_.front().front() == '/') {
    throw std::invalid_argument("field path must not start with '/'");
  }
}

FieldPath FieldPath::parse(std::string_view dotted) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    segments.emplace_back(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return FieldPath(std::move(segments));
}

bool FieldPath::is_valid_segment(std::string_view segment) {
  if (segment.empty()) return false;
  for (char c : segment) {
    if (is_space(c) || is_structural(c) || c == '.' || c == '"' || c == '=' || c == '~' || c == '<' ||
        c == '>' || c == '!' || static_cast<unsigned char>(c) < 0x20) {
      return false;
    }
  }
  return true;
}

std::string FieldPath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) out += '.';
    out += segments_[i];
  }
  return out;
}

// Matcher ----------------------------------------------------------------------

std::optional<std::string> check_regex_dialect(std::string_view p) {
  bool in_class = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const char c = p[i];
    if (c == '\\') {
      if (i + 1 >= p.size()) return "pattern ends with a lone backslash";
      const char e = p[i + 1];
      if (!in_class) {
        if (e >= '1' && e <= '9') return "backreferences are not supported";
        if (e == 'k' || e == 'g') return "backreferences are not supported";
      }
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
      // A leading ']' (optionally after '^') is a literal member.
      if (i + 1 < p.size() && p[i + 1] == '^') ++i;
      if (i + 1 < p.size() && p[i + 1] == ']') ++i;
      continue;
    }
    if (c == '(' && i + 1 < p.size() && p[i + 1] == '?') {
      const std::string_view rest = p.substr(i + 2);
      if (rest.starts_with("=") || rest.starts_with("!") || rest.starts_with("<=") || rest.starts_with("<!")) {
        return "lookaround assertions are not supported";
      }
      if (rest.starts_with(">")) return "atomic groups are not supported";
      if (rest.starts_with("(")) return "conditional groups are not supported";
      if (rest.starts_with("R") || rest.starts_with("&") || rest.starts_with("P>") ||
          rest.starts_with("P=") || (!rest.empty() && rest[0] >= '0' && rest[0] <= '9') ||
          rest.starts_with("+") ||
          (rest.starts_with("-") && rest.size() > 1 && rest[1] >= '0' && rest[1] <= '9')) {
        return "recursion and subroutine calls are not supported";
      }
      continue;
    }
    if ((c == '*' || c == '+' || c == '?' || c == '}') && i + 1 < p.size() && p[i + 1] == '+') {
      return "possessive quantifiers are not supported";
    }
  }
  if (in_class) return "unterminated character class";
  return std::nullopt;
}

struct Matcher::Impl {
  boost::regex re;
};

Matcher::Matcher(std::string_view pattern, bool case_insensitive) : impl_(std::make_unique<Impl>()) {
  if (auto problem = check_regex_dialect(pattern)) throw std::invalid_argument(*problem);
  boost::regex::flag_type flags = boost::regex::perl;
  if (case_insensitive) flags |= boost::regex::icase;
  try {
    impl_->re.assign(pattern.begin(), pattern.end(), flags);
  } catch (const boost::regex_error& e) {
    throw std::invalid_argument(std::string("invalid regular expression: ") + e.what());
  }
}

Matcher::~Matcher() = default;

bool Matcher::search(std::string_view text) const {
  try {
    return boost::regex_search(text.begin(), text.end(), impl_->re, boost::match_any);
  } catch (const std::runtime_error&) {
    // Match complexity limits exceeded; treat as no match.
    return false;
  }
}

// Literal ----------------------------------------------------------------------

bool is_numeric_lexeme(std::string_view w) {
  std::size_t i = 0;
  if (i < w.size() && (w[i] == '+' || w[i] == '-')) ++i;
  const std::size_t int_start = i;
  while (i < w.size() && w[i] >= '0' && w[i] <= '9') ++i;
  if (i == int_start) return false;
  if (i == w.size()) return true;
  if (w[i] != '.') return false;
  ++i;
  const std::size_t frac_start = i;
  while (i < w.size() && w[i] >= '0' && w[i] <= '9') ++i;
  return i > frac_start && i == w.size();
}

Literal Literal::num(std::string lexeme) {
  if (!is_numeric_lexeme(lexeme)) throw std::invalid_argument("not a numeric literal: " + lexeme);
  Decimal value = *Decimal::parse(lexeme);
  return Literal(Num{std::move(value), std::move(lexeme)});
}

const std::string& Literal::text() const {
  if (is_str()) return as_str().text;
  if (is_num()) return as_num().lexeme;
  return as_regex().pattern;
}

Comparison Comparison::make(FieldPath path, ComparisonOp op, Literal literal) {
  if (path.segments().empty()) throw std::invalid_argument("comparison needs a field path");
  if (literal.is_regex() && op != ComparisonOp::Match) {
    throw std::invalid_argument("a regular expression literal requires the '~' operator");
  }
  Comparison out{std::move(path), op, std::move(literal), nullptr};
  if (op == ComparisonOp::Match) {
    const bool icase = out.literal.is_regex() && out.literal.as_regex().case_insensitive;
    out.matcher = std::make_shared<const Matcher>(out.literal.text(), icase);
  }
  return out;
}

// QueryAst ---------------------------------------------------------------------

struct QueryAst::Node {
  Kind kind;
  std::optional<QueryAst> left;
  std::optional<QueryAst> right;
  std::optional<Comparison> cmp;
};

QueryAst QueryAst::make_or(QueryAst left, QueryAst right) {
  return QueryAst(std::make_shared<const Node>(Node{Kind::Or, std::move(left), std::move(right), std::nullopt}));
}

QueryAst QueryAst::make_and(QueryAst left, QueryAst right) {
  return QueryAst(std::make_shared<const Node>(Node{Kind::And, std::move(left), std::move(right), std::nullopt}));
}

QueryAst QueryAst::make_cmp(Comparison cmp) {
  return QueryAst(std::make_shared<const Node>(Node{Kind::Cmp, std::nullopt, std::nullopt, std::move(cmp)}));
}

QueryAst::Kind QueryAst::kind() const { return node_->kind; }
const QueryAst& QueryAst::left() const { return *node_->left; }
const QueryAst& QueryAst::right() const { return *node_->right; }
const Comparison& QueryAst::comparison() const { return *node_->cmp; }

bool operator==(const QueryAst& a, const QueryAst& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.is_cmp()) return a.comparison() == b.comparison();
  return a.left() == b.left() && a.right() == b.right();
}

// Lexer ----------------------------------------------------------------------

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t pos = 0;
  const std::size_t n = s.size();

  auto push = [&](TokenKind kind, std::string value, std::size_t start, std::size_t end, bool icase = false) {
    out.push_back(Token{kind, std::move(value), std::string(s.substr(start, end - start)), start, icase});
  };

  while (pos < n) {
    const char c = s[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    switch (c) {
      case '(':
        push(TokenKind::LParen, "(", pos, pos + 1);
        ++pos;
        continue;
      case ')':
        push(TokenKind::RParen, ")", pos, pos + 1);
        ++pos;
        continue;
      case '&':
        push(TokenKind::Amp, "&", pos, pos + 1);
        ++pos;
        continue;
      case '|':
        push(TokenKind::Pipe, "|", pos, pos + 1);
        ++pos;
        continue;
      default:
        break;
    }

    if (c == '"') {
      std::string value;
      std::size_t i = pos + 1;
      bool closed = false;
      while (i < n) {
        if (s[i] == '\\' && i + 1 < n && (s[i + 1] == '"' || s[i + 1] == '\\')) {
          value += s[i + 1];
          i += 2;
        } else if (s[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          value += s[i++];
        }
      }
      if (!closed) throw ParseError("unterminated quoted string", pos, n - pos);
      push(TokenKind::Quoted, std::move(value), pos, i);
      pos = i;
      continue;
    }

    if (const std::size_t len = operator_length(s, pos)) {
      push(TokenKind::Op, std::string(s.substr(pos, len)), pos, pos + len);
      pos += len;
      continue;
    }

    if (c == '/') {
      // The pattern runs to the last unescaped '/' of the non-space run.
      std::size_t run_end = pos + 1;
      std::size_t last_slash = std::string_view::npos;
      while (run_end < n && !is_space(s[run_end])) {
        if (s[run_end] == '\\' && run_end + 1 < n) {
          run_end += 2;
          continue;
        }
        if (s[run_end] == '/') last_slash = run_end;
        ++run_end;
      }
      if (last_slash == std::string_view::npos) {
        throw ParseError("unterminated regular expression", pos, run_end - pos);
      }
      std::size_t i = last_slash + 1;
      bool icase = false;
      while (i < n && is_letter(s[i])) {
        if (s[i] != 'i') throw ParseError(std::string("unknown regular expression flag '") + s[i] + "'", i, 1);
        icase = true;
        ++i;
      }
      push(TokenKind::Regex, std::string(s.substr(pos + 1, last_slash - pos - 1)), pos, i, icase);
      pos = i;
      continue;
    }

    std::size_t i = pos;
    while (i < n && !is_space(s[i]) && !is_structural(s[i]) && operator_length(s, i) == 0) ++i;
    push(TokenKind::Word, std::string(s.substr(pos, i - pos)), pos, i);
    pos = i;
  }
  return out;
}

// Parser -----------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view input, std::vector<Token> tokens) : input_(input), tokens_(std::move(tokens)) {}

  QueryAst parse() {
    if (tokens_.empty()) throw ParseError("empty query", 0, 0);
    QueryAst ast = expr();
    if (!at_end()) {
      const Token& t = peek();
      if (t.kind == TokenKind::RParen) throw error_at(t, "unbalanced ')'");
      throw error_at(t, "expected '&' or '|' before '" + t.lexeme + "'");
    }
    return ast;
  }

 private:
  QueryAst expr() {
    QueryAst left = logic();
    if (!at_end() && peek().kind == TokenKind::Pipe) {
      ++pos_;
      return QueryAst::make_or(std::move(left), expr());
    }
    return left;
  }

  QueryAst logic() {
    QueryAst left = primary();
    if (!at_end() && peek().kind == TokenKind::Amp) {
      ++pos_;
      return QueryAst::make_and(std::move(left), logic());
    }
    return left;
  }

  QueryAst primary() {
    if (at_end()) throw ParseError("expected a comparison or '('", input_.size(), 0);
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::LParen: {
        ++pos_;
        QueryAst inner = expr();
        if (at_end() || peek().kind != TokenKind::RParen) {
          if (!at_end()) {
            const Token& bad = peek();
            throw error_at(bad, "expected ')' before '" + bad.lexeme + "'");
          }
          throw error_at(t, "unbalanced '(': missing ')'");
        }
        ++pos_;
        return inner;
      }
      case TokenKind::Word:
        return comparison();
      case TokenKind::Quoted:
      case TokenKind::Regex:
        throw error_at(t, "left operand must be a field path, not a literal");
      case TokenKind::Op:
        throw error_at(t, "missing left operand before '" + t.lexeme + "'");
      case TokenKind::RParen:
        throw error_at(t, "unexpected ')'");
      case TokenKind::Amp:
      case TokenKind::Pipe:
        throw error_at(t, "missing operand before '" + t.lexeme + "'");
    }
    throw std::logic_error("unreachable token kind");
  }

  QueryAst comparison() {
    const Token& path_token = tokens_[pos_++];
    FieldPath path;
    try {
      path = FieldPath::parse(path_token.value);
    } catch (const std::invalid_argument& e) {
      throw error_at(path_token, e.what());
    }

    if (at_end()) {
      throw ParseError("expected a comparison operator after '" + path_token.lexeme + "'", input_.size(), 0);
    }
    const Token& op_token = peek();
    if (op_token.kind != TokenKind::Op) {
      throw error_at(op_token, "expected a comparison operator after '" + path_token.lexeme + "'");
    }
    ++pos_;
    const ComparisonOp op = *op_from_symbol(op_token.value);

    if (at_end()) {
      throw ParseError("missing right operand after '" + op_token.lexeme + "'", input_.size(), 0);
    }
    const Token& operand = peek();
    Literal literal;
    switch (operand.kind) {
      case TokenKind::Word:
        literal = is_numeric_lexeme(operand.value) ? Literal::num(operand.value) : Literal::str(operand.value);
        break;
      case TokenKind::Quoted:
        literal = Literal::str(operand.value);
        break;
      case TokenKind::Regex:
        if (op != ComparisonOp::Match) {
          throw error_at(operand, "a regular expression requires the '~' operator, not '" + op_token.lexeme + "'");
        }
        literal = Literal::regex(operand.value, operand.case_insensitive);
        break;
      default:
        throw error_at(operand, "missing right operand after '" + op_token.lexeme + "'");
    }
    ++pos_;

    try {
      return QueryAst::make_cmp(Comparison::make(std::move(path), op, std::move(literal)));
    } catch (const std::invalid_argument& e) {
      throw error_at(operand, e.what());
    }
  }

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  static ParseError error_at(const Token& t, std::string message) {
    return ParseError(std::move(message), t.offset, t.lexeme.size());
  }

  std::string_view input_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void quote_into(std::string& out, const std::string& text) {
  out += '"';
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

void format_into(std::string& out, const QueryAst& ast) {
  switch (ast.kind()) {
    case QueryAst::Kind::Cmp: {
      const Comparison& cmp = ast.comparison();
      out += cmp.path.to_string();
      out += ' ';
      out += op_symbol(cmp.op);
      out += ' ';
      if (cmp.literal.is_str()) {
        quote_into(out, cmp.literal.as_str().text);
      } else if (cmp.literal.is_num()) {
        out += cmp.literal.as_num().lexeme;
      } else {
        const auto& re = cmp.literal.as_regex();
        out += '/';
        out += re.pattern;
        out += '/';
        if (re.case_insensitive) out += 'i';
      }
      return;
    }
    case QueryAst::Kind::Or:
    case QueryAst::Kind::And: {
      const bool is_and = ast.kind() == QueryAst::Kind::And;
      // Chains are right-associative, so a same-operator left child needs
      // parentheses; under '&' any '|' child does too.
      const bool paren_left = ast.left().kind() == QueryAst::Kind::Or || (is_and && !ast.left().is_cmp());
      const bool paren_right = is_and && ast.right().kind() == QueryAst::Kind::Or;
      if (paren_left) out += '(';
      format_into(out, ast.left());
      if (paren_left) out += ')';
      out += is_and ? " & " : " | ";
      if (paren_right) out += '(';
      format_into(out, ast.right());
      if (paren_right) out += ')';
      return;
    }
  }
}

}  // namespace

QueryAst parse_query(std::string_view input) { return Parser(input, tokenize(input)).parse(); }

std::string format_query(const QueryAst& ast) {
  std::string out;
  format_into(out, ast);
  return out;
}

}  // namespace refsearch
