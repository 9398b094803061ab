#include "sff/msgs/codec.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sff::msgs {

namespace {

std::string issues_to_string(const std::string& context,
                             const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << context << ":";
  for (const auto& i : issues) os << " [" << i.field << ": " << i.what << "]";
  return os.str();
}

bool scalar_type_matches(const FieldValue& v, FieldType t) {
  switch (t) {
    case FieldType::F64: return std::holds_alternative<double>(v);
    case FieldType::F32: return std::holds_alternative<float>(v);
    case FieldType::I64: return std::holds_alternative<std::int64_t>(v);
    case FieldType::I32: return std::holds_alternative<std::int32_t>(v);
    case FieldType::Bool: return std::holds_alternative<bool>(v);
    case FieldType::String: return std::holds_alternative<std::string>(v);
  }
  return false;
}

template <class T>
bool check_array(const FieldValue& v, int declared_len, std::string* what) {
  const auto* arr = std::get_if<std::vector<T>>(&v);
  if (!arr) {
    *what = "array element type mismatch";
    return false;
  }
  if (declared_len >= 0 &&
      arr->size() != static_cast<std::size_t>(declared_len)) {
    *what = "array length " + std::to_string(arr->size()) + ", expected " +
            std::to_string(declared_len);
    return false;
  }
  if constexpr (std::is_floating_point_v<T>) {
    for (T x : *arr) {
      if (!std::isfinite(x)) {
        *what = "non-finite value";
        return false;
      }
    }
  }
  return true;
}

bool array_type_matches(const FieldValue& v, const FieldSpec& f,
                        std::string* what) {
  switch (f.type) {
    case FieldType::F64: return check_array<double>(v, f.array_len, what);
    case FieldType::F32: return check_array<float>(v, f.array_len, what);
    case FieldType::I64: return check_array<std::int64_t>(v, f.array_len, what);
    case FieldType::I32: return check_array<std::int32_t>(v, f.array_len, what);
    case FieldType::Bool: return check_array<bool>(v, f.array_len, what);
    case FieldType::String:
      *what = "string arrays are not supported";
      return false;
  }
  return false;
}

}  // namespace

ValidationError::ValidationError(const std::string& context,
                                 std::vector<ValidationIssue> issues)
    : SchemaError(issues_to_string(context, issues)),
      issues_(std::move(issues)) {}

std::vector<ValidationIssue> validate(const MessageValue& value,
                                      const MessageSchema& schema) {
  std::vector<ValidationIssue> issues;
  for (const auto& f : schema.fields) {
    auto it = value.fields.find(f.name);
    if (it == value.fields.end()) {
      if (f.required) issues.push_back({f.name, "missing required field"});
      continue;
    }
    const FieldValue& v = it->second;
    std::string what;
    if (f.is_array) {
      if (!array_type_matches(v, f, &what)) issues.push_back({f.name, what});
    } else if (!scalar_type_matches(v, f.type)) {
      issues.push_back(
          {f.name, std::string("expected ") + std::string(field_type_name(f.type))});
    } else if (f.type == FieldType::F64 && !std::isfinite(std::get<double>(v))) {
      issues.push_back({f.name, "non-finite value"});
    } else if (f.type == FieldType::F32 && !std::isfinite(std::get<float>(v))) {
      issues.push_back({f.name, "non-finite value"});
    }
  }
  for (const auto& [name, v] : value.fields) {
    if (!schema.find(name)) issues.push_back({name, "not in schema"});
  }
  return issues;
}

namespace {

nlohmann::ordered_json field_to_json(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        return nlohmann::ordered_json(x);
      },
      v);
}

}  // namespace

nlohmann::ordered_json encode_json(const MessageValue& value,
                                   const MessageSchema& schema) {
  auto issues = validate(value, schema);
  if (!issues.empty()) {
    throw ValidationError("invalid " + schema.name + " value", std::move(issues));
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& f : schema.fields) {
    auto it = value.fields.find(f.name);
    if (it == value.fields.end()) continue;  // optional and absent
    doc[f.name] = field_to_json(it->second);
  }
  return doc;
}

std::string encode(const MessageValue& value, const MessageSchema& schema) {
  return encode_json(value, schema).dump();
}

std::string encode(const MessageValue& value, const SchemaRegistry& registry) {
  return encode(value, registry.at(value.schema));
}

namespace {

bool json_to_field(const nlohmann::json& j, const FieldSpec& f, FieldValue* out,
                   std::string* what) {
  auto scalar = [&](const nlohmann::json& e, FieldType t, FieldValue* v) {
    switch (t) {
      case FieldType::F64:
        if (!e.is_number()) { *what = "expected number"; return false; }
        *v = e.get<double>();
        return true;
      case FieldType::F32:
        if (!e.is_number()) { *what = "expected number"; return false; }
        *v = static_cast<float>(e.get<double>());
        return true;
      case FieldType::I64:
        if (!e.is_number_integer() && !e.is_number_unsigned()) {
          *what = "expected integer";
          return false;
        }
        if (e.is_number_unsigned() &&
            e.get<std::uint64_t>() >
                static_cast<std::uint64_t>(
                    std::numeric_limits<std::int64_t>::max())) {
          *what = "integer out of i64 range";
          return false;
        }
        *v = e.get<std::int64_t>();
        return true;
      case FieldType::I32: {
        if (!e.is_number_integer() && !e.is_number_unsigned()) {
          *what = "expected integer";
          return false;
        }
        const auto x = e.get<std::int64_t>();
        if (x < std::numeric_limits<std::int32_t>::min() ||
            x > std::numeric_limits<std::int32_t>::max()) {
          *what = "integer out of i32 range";
          return false;
        }
        *v = static_cast<std::int32_t>(x);
        return true;
      }
      case FieldType::Bool:
        if (!e.is_boolean()) { *what = "expected bool"; return false; }
        *v = e.get<bool>();
        return true;
      case FieldType::String:
        if (!e.is_string()) { *what = "expected string"; return false; }
        *v = e.get<std::string>();
        return true;
    }
    return false;
  };

  if (!f.is_array) return scalar(j, f.type, out);

  if (!j.is_array()) {
    *what = "expected array";
    return false;
  }
  if (f.array_len >= 0 && j.size() != static_cast<std::size_t>(f.array_len)) {
    *what = "array length " + std::to_string(j.size()) + ", expected " +
            std::to_string(f.array_len);
    return false;
  }
  auto fill = [&](auto tag) -> bool {
    using T = decltype(tag);
    std::vector<T> arr;
    arr.reserve(j.size());
    for (const auto& e : j) {
      FieldValue v;
      if (!scalar(e, f.type, &v)) return false;
      arr.push_back(std::get<T>(v));
    }
    *out = std::move(arr);
    return true;
  };
  switch (f.type) {
    case FieldType::F64: return fill(double{});
    case FieldType::F32: return fill(float{});
    case FieldType::I64: return fill(std::int64_t{});
    case FieldType::I32: return fill(std::int32_t{});
    case FieldType::Bool: return fill(bool{});
    case FieldType::String: *what = "string arrays are not supported"; return false;
  }
  return false;
}

}  // namespace

MessageValue decode_json(const nlohmann::json& doc, const MessageSchema& schema,
                         DecodeMode mode) {
  std::vector<ValidationIssue> issues;
  if (!doc.is_object()) {
    throw SchemaMismatchError(schema.name, {{"", "document is not an object"}});
  }
  MessageValue value(schema.name);
  for (const auto& f : schema.fields) {
    auto it = doc.find(f.name);
    if (it == doc.end()) {
      if (f.required) issues.push_back({f.name, "missing required field"});
      continue;
    }
    FieldValue v;
    std::string what;
    if (!json_to_field(*it, f, &v, &what)) {
      issues.push_back({f.name, what});
      continue;
    }
    value.fields.emplace(f.name, std::move(v));
  }
  if (mode == DecodeMode::Strict) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!schema.find(it.key())) issues.push_back({it.key(), "unknown field"});
    }
  }
  if (!issues.empty()) {
    throw SchemaMismatchError(schema.name + " decode failed", std::move(issues));
  }
  return value;
}

MessageValue decode(std::string_view bytes, const MessageSchema& schema,
                    DecodeMode mode) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonSyntaxError(std::string("JSON syntax error: ") + e.what());
  }
  return decode_json(doc, schema, mode);
}

}  // namespace sff::msgs
