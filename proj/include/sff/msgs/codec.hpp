#pragma once

#include "sff/msgs/schema.hpp"
#include "sff/msgs/value.hpp"

#include <nlohmann/json.hpp>

namespace sff::msgs {

enum class DecodeMode { Strict, Lenient };

struct ValidationIssue {
  std::string field;
  std::string what;
};

class ValidationError : public SchemaError {
 public:
  ValidationError(const std::string& context,
                  std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

class SchemaMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class JsonSyntaxError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

/// Checks a value against a schema; empty result means valid.
std::vector<ValidationIssue> validate(const MessageValue& value,
                                      const MessageSchema& schema);

/// UTF-8 JSON object bytes with keys in schema declaration order, so the
/// encoding of a given value is byte-stable. Throws ValidationError.
std::string encode(const MessageValue& value, const SchemaRegistry& registry);
std::string encode(const MessageValue& value, const MessageSchema& schema);

/// Builds the JSON object without serializing (used by the bridge to
/// splice payloads into frame envelopes unchanged).
nlohmann::ordered_json encode_json(const MessageValue& value,
                                   const MessageSchema& schema);

/// Throws JsonSyntaxError on malformed JSON and SchemaMismatchError when
/// the document does not satisfy the schema. Strict mode rejects unknown
/// keys; lenient mode ignores them.
MessageValue decode(std::string_view bytes, const MessageSchema& schema,
                    DecodeMode mode = DecodeMode::Strict);
MessageValue decode_json(const nlohmann::json& doc, const MessageSchema& schema,
                         DecodeMode mode = DecodeMode::Strict);

}  // namespace sff::msgs
