#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace sff::msgs {

using FieldValue =
    std::variant<double, float, std::int64_t, std::int32_t, bool, std::string,
                 std::vector<double>, std::vector<float>,
                 std::vector<std::int64_t>, std::vector<std::int32_t>,
                 std::vector<bool>>;

/// A message instance: a schema name plus field values. Valid iff it
/// satisfies the schema (required fields present, types and array lengths
/// matching).
struct MessageValue {
  std::string schema;
  std::unordered_map<std::string, FieldValue> fields;

  MessageValue() = default;
  explicit MessageValue(std::string schema_name)
      : schema(std::move(schema_name)) {}

  MessageValue& set(const std::string& name, FieldValue v) {
    fields[name] = std::move(v);
    return *this;
  }

  template <class T>
  const T& get(const std::string& name) const {
    return std::get<T>(fields.at(name));
  }

  bool operator==(const MessageValue&) const = default;
};

}  // namespace sff::msgs
