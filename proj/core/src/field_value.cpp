#include "refsearch/field_value.hpp"

#include <stdexcept>

namespace refsearch {

const FieldValue* FieldValue::find(std::string_view key) const {
  if (!is_object()) return nullptr;
  for (const auto& [name, value] : as_object()) {
    if (name == key) return &value;
  }
  return nullptr;
}

FieldValue from_json_value(const nlohmann::json& json) {
  using value_t = nlohmann::json::value_t;
  switch (json.type()) {
    case value_t::null:
      return FieldValue(FieldValue::Null{});
    case value_t::boolean:
      return FieldValue(json.get<bool>());
    case value_t::number_integer:
      return FieldValue(Decimal::from_int(json.get<std::int64_t>()));
    case value_t::number_unsigned:
      return FieldValue(Decimal::from_uint(json.get<std::uint64_t>()));
    case value_t::number_float: {
      auto d = Decimal::from_double(json.get<double>());
      if (!d) return FieldValue(FieldValue::Null{});
      return FieldValue(*d);
    }
    case value_t::string:
      return FieldValue(json.get<std::string>());
    case value_t::array: {
      FieldValue::Array out;
      out.reserve(json.size());
      for (const auto& item : json) out.push_back(from_json_value(item));
      return FieldValue(std::move(out));
    }
    case value_t::object: {
      FieldValue::Object out;
      out.reserve(json.size());
      for (const auto& [key, item] : json.items()) out.emplace_back(key, from_json_value(item));
      return FieldValue(std::move(out));
    }
    default:
      return FieldValue(FieldValue::Null{});
  }
}

namespace {

// SAX handler building a FieldValue tree directly; avoids an intermediate
// nlohmann::json and keeps float lexemes exact.
class FieldValueBuilder {
 public:
  using number_integer_t = nlohmann::json::number_integer_t;
  using number_unsigned_t = nlohmann::json::number_unsigned_t;
  using number_float_t = nlohmann::json::number_float_t;
  using string_t = nlohmann::json::string_t;
  using binary_t = nlohmann::json::binary_t;

  bool null() { return put(FieldValue(FieldValue::Null{})); }
  bool boolean(bool v) { return put(FieldValue(v)); }
  bool number_integer(number_integer_t v) { return put(FieldValue(Decimal::from_int(v))); }
  bool number_unsigned(number_unsigned_t v) { return put(FieldValue(Decimal::from_uint(v))); }
  bool number_float(number_float_t v, const string_t& lexeme) {
    auto d = Decimal::parse(lexeme);
    if (!d) d = Decimal::from_double(v);
    return put(d ? FieldValue(*d) : FieldValue(FieldValue::Null{}));
  }
  bool string(string_t& v) { return put(FieldValue(std::move(v))); }
  bool binary(binary_t&) { return put(FieldValue(FieldValue::Null{})); }

  bool start_object(std::size_t) {
    stack_.emplace_back(FieldValue(FieldValue::Object{}), std::string{});
    return true;
  }
  bool key(string_t& k) {
    stack_.back().second = std::move(k);
    return true;
  }
  bool end_object() { return pop(); }
  bool start_array(std::size_t) {
    stack_.emplace_back(FieldValue(FieldValue::Array{}), std::string{});
    return true;
  }
  bool end_array() { return pop(); }

  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    throw std::invalid_argument(ex.what());
  }

  FieldValue take() { return std::move(root_); }

 private:
  bool put(FieldValue v) {
    if (stack_.empty()) {
      root_ = std::move(v);
      return true;
    }
    auto& [top, pending_key] = stack_.back();
    if (top.is_array()) {
      top.as_array().push_back(std::move(v));
    } else {
      top.as_object().emplace_back(std::move(pending_key), std::move(v));
    }
    return true;
  }

  bool pop() {
    FieldValue done = std::move(stack_.back().first);
    stack_.pop_back();
    return put(std::move(done));
  }

  std::vector<std::pair<FieldValue, std::string>> stack_;
  FieldValue root_;
};

}  // namespace

FieldValue parse_json_text(std::string_view text) {
  FieldValueBuilder builder;
  nlohmann::json::sax_parse(text.begin(), text.end(), &builder);
  return builder.take();
}

nlohmann::json to_json_value(const FieldValue& value) {
  switch (value.kind()) {
    case FieldValue::Kind::Missing:
    case FieldValue::Kind::Null:
      return nullptr;
    case FieldValue::Kind::Bool:
      return value.as_bool();
    case FieldValue::Kind::Num: {
      const Decimal& d = value.as_num();
      if (auto i = d.to_int64()) return *i;
      return d.to_double();
    }
    case FieldValue::Kind::Str:
      return value.as_str();
    case FieldValue::Kind::Array: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& item : value.as_array()) out.push_back(to_json_value(item));
      return out;
    }
    case FieldValue::Kind::Object: {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& [key, item] : value.as_object()) {
        if (!item.is_missing()) out[key] = to_json_value(item);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable FieldValue kind");
}

}  // namespace refsearch
