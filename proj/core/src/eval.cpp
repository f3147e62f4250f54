#include "refsearch/eval.hpp"

namespace refsearch {

namespace {

FieldValue resolve_from(const FieldValue& value, const std::vector<std::string>& segments, std::size_t idx) {
  if (idx == segments.size()) return value;
  if (value.is_object()) {
    const FieldValue* child = value.find(segments[idx]);
    if (child == nullptr) return FieldValue::Missing{};
    return resolve_from(*child, segments, idx + 1);
  }
  if (value.is_array()) {
    FieldValue::Array mapped;
    for (const auto& element : value.as_array()) {
      FieldValue r = resolve_from(element, segments, idx);
      if (!r.is_missing()) mapped.push_back(std::move(r));
    }
    if (mapped.empty()) return FieldValue::Missing{};
    return FieldValue(std::move(mapped));
  }
  return FieldValue::Missing{};
}

// Positive (non-`!=`) comparison against one value; arrays use exists.
bool positive_leaf(const FieldValue& value, ComparisonOp op, const Literal& literal, const Matcher* matcher) {
  if (value.is_array()) {
    for (const auto& element : value.as_array()) {
      if (positive_leaf(element, op, literal, matcher)) return true;
    }
    return false;
  }
  if (literal.is_regex() && op != ComparisonOp::Match) return false;

  switch (op) {
    case ComparisonOp::Eq:
      if (value.is_num() && literal.is_num()) return value.as_num() == literal.as_num().value;
      if (value.is_str() && !literal.is_regex()) return value.as_str() == literal.text();
      return false;
    case ComparisonOp::Match:
      return value.is_str() && matcher != nullptr && matcher->search(value.as_str());
    case ComparisonOp::Lt:
    case ComparisonOp::Le:
    case ComparisonOp::Gt:
    case ComparisonOp::Ge: {
      std::strong_ordering order = std::strong_ordering::equal;
      if (value.is_num() && literal.is_num()) {
        order = value.as_num() <=> literal.as_num().value;
      } else if (value.is_str() && literal.is_str()) {
        order = value.as_str().compare(literal.as_str().text) <=> 0;
      } else {
        return false;
      }
      if (op == ComparisonOp::Lt) return order < 0;
      if (op == ComparisonOp::Le) return order <= 0;
      if (op == ComparisonOp::Gt) return order > 0;
      return order >= 0;
    }
    case ComparisonOp::Neq:
      break;
  }
  return false;
}

// Same as positive_leaf(resolve_path(doc, path)) without materializing the
// mapped arrays.
bool positive_path(const FieldValue& value, const std::vector<std::string>& segments, std::size_t idx,
                   ComparisonOp op, const Literal& literal, const Matcher* matcher) {
  if (idx == segments.size()) return positive_leaf(value, op, literal, matcher);
  if (value.is_object()) {
    const FieldValue* child = value.find(segments[idx]);
    return child != nullptr && positive_path(*child, segments, idx + 1, op, literal, matcher);
  }
  if (value.is_array()) {
    for (const auto& element : value.as_array()) {
      if (positive_path(element, segments, idx, op, literal, matcher)) return true;
    }
  }
  return false;
}

bool eval_comparison(const FieldValue& doc, const Comparison& cmp) {
  const auto& segments = cmp.path.segments();
  if (cmp.op == ComparisonOp::Neq) {
    return !positive_path(doc, segments, 0, ComparisonOp::Eq, cmp.literal, nullptr);
  }
  return positive_path(doc, segments, 0, cmp.op, cmp.literal, cmp.matcher.get());
}

void collect_conjuncts(const QueryAst& ast, std::vector<Comparison>& out) {
  switch (ast.kind()) {
    case QueryAst::Kind::Cmp:
      out.push_back(ast.comparison());
      return;
    case QueryAst::Kind::And:
      collect_conjuncts(ast.left(), out);
      collect_conjuncts(ast.right(), out);
      return;
    case QueryAst::Kind::Or:
      return;
  }
}

}  // namespace

FieldValue resolve_path(const FieldValue& doc, const FieldPath& path) {
  return resolve_from(doc, path.segments(), 0);
}

bool compare(const FieldValue& value, const Comparison& cmp) {
  if (cmp.op == ComparisonOp::Neq) return !positive_leaf(value, ComparisonOp::Eq, cmp.literal, nullptr);
  return positive_leaf(value, cmp.op, cmp.literal, cmp.matcher.get());
}

bool compare(const FieldValue& value, ComparisonOp op, const Literal& literal) {
  if (op == ComparisonOp::Neq) return !positive_leaf(value, ComparisonOp::Eq, literal, nullptr);
  std::unique_ptr<Matcher> matcher;
  if (op == ComparisonOp::Match) {
    try {
      matcher = std::make_unique<Matcher>(literal.text(),
                                          literal.is_regex() && literal.as_regex().case_insensitive);
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
  return positive_leaf(value, op, literal, matcher.get());
}

bool eval_query(const QueryAst& ast, const FieldValue& doc) {
  switch (ast.kind()) {
    case QueryAst::Kind::Cmp:
      return eval_comparison(doc, ast.comparison());
    case QueryAst::Kind::And:
      return eval_query(ast.left(), doc) && eval_query(ast.right(), doc);
    case QueryAst::Kind::Or:
      return eval_query(ast.left(), doc) || eval_query(ast.right(), doc);
  }
  return false;
}

std::vector<Comparison> index_candidates(const QueryAst& ast) {
  std::vector<Comparison> out;
  collect_conjuncts(ast, out);
  return out;
}

}  // namespace refsearch
