#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "refsearch/decimal.hpp"

namespace refsearch {

/// A node of a hierarchical case document: the JSON data model plus an
/// explicit Missing marker that is distinct from Null.
class FieldValue {
 public:
  struct Missing {
    friend bool operator==(Missing, Missing) { return true; }
  };
  struct Null {
    friend bool operator==(Null, Null) { return true; }
  };
  using Array = std::vector<FieldValue>;
  /// Key order is preserved as inserted.
  using Object = std::vector<std::pair<std::string, FieldValue>>;

  enum class Kind { Missing, Null, Bool, Num, Str, Array, Object };

  FieldValue() = default;
  FieldValue(Missing) {}
  FieldValue(Null v) : value_(v) {}
  FieldValue(bool v) : value_(v) {}
  FieldValue(Decimal v) : value_(std::move(v)) {}
  FieldValue(std::string v) : value_(std::move(v)) {}
  FieldValue(const char* v) : value_(std::string(v)) {}
  FieldValue(Array v) : value_(std::move(v)) {}
  FieldValue(Object v) : value_(std::move(v)) {}

  static FieldValue number(std::int64_t v) { return FieldValue(Decimal::from_int(v)); }

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is_missing() const { return kind() == Kind::Missing; }
  bool is_null() const { return kind() == Kind::Null; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_num() const { return kind() == Kind::Num; }
  bool is_str() const { return kind() == Kind::Str; }
  bool is_array() const { return kind() == Kind::Array; }
  bool is_object() const { return kind() == Kind::Object; }

  bool as_bool() const { return std::get<bool>(value_); }
  const Decimal& as_num() const { return std::get<Decimal>(value_); }
  const std::string& as_str() const { return std::get<std::string>(value_); }
  const Array& as_array() const { return std::get<Array>(value_); }
  Array& as_array() { return std::get<Array>(value_); }
  const Object& as_object() const { return std::get<Object>(value_); }
  Object& as_object() { return std::get<Object>(value_); }

  /// Member lookup on an Object; nullptr when absent or not an Object.
  const FieldValue* find(std::string_view key) const;

  friend bool operator==(const FieldValue&, const FieldValue&) = default;

 private:
  std::variant<Missing, Null, bool, Decimal, std::string, Array, Object> value_;
};

/// Converts a parsed JSON value. Numbers become exact decimals.
FieldValue from_json_value(const nlohmann::json& json);

/// Parses JSON text straight into a FieldValue, keeping the original number
/// lexemes. Throws std::invalid_argument on malformed input.
FieldValue parse_json_text(std::string_view text);

/// Inverse of from_json_value. Missing members are dropped; a top-level
/// Missing becomes null. Integral numbers that fit int64 become JSON integers.
nlohmann::json to_json_value(const FieldValue& value);

}  // namespace refsearch
