#pragma once

#include <vector>

#include "refsearch/field_value.hpp"
#include "refsearch/query.hpp"

namespace refsearch {

/// Walks `path` through `doc`. A missing key yields Missing. When an
/// intermediate value is an Array the rest of the path is mapped over its
/// elements; Missing results are dropped and an empty result is Missing.
FieldValue resolve_path(const FieldValue& doc, const FieldPath& path);

/// Comparison semantics:
///  - Arrays: true iff some element satisfies the comparison, except `!=`
///    which is the negation of `=` on the whole value.
///  - `=`: number/number numerically, number literal/string value against the
///    literal's lexeme, string/string bytewise. Anything else is false.
///  - `~`: unanchored regex search, string values only.
///  - `<` `<=` `>` `>=`: number/number or string literal/string value
///    (byte order). Anything else is false.
/// Never throws.
bool compare(const FieldValue& value, const Comparison& cmp);
bool compare(const FieldValue& value, ComparisonOp op, const Literal& literal);

bool eval_query(const QueryAst& ast, const FieldValue& doc);

/// Comparisons reachable from the root through `&` nodes only, i.e. the ones
/// every matching document satisfies.
std::vector<Comparison> index_candidates(const QueryAst& ast);

}  // namespace refsearch
