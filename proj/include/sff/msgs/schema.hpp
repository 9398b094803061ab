#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sff::msgs {

enum class FieldType { F64, F32, I64, I32, Bool, String };

std::string_view field_type_name(FieldType t);

struct FieldSpec {
  std::string name;
  FieldType type{FieldType::F64};
  bool is_array{false};
  int array_len{-1};  // -1 for variable-length arrays
  std::string unit;
  bool required{true};
};

/// Declared message layout: an ordered field list plus a version tag.
/// Field order is the wire key order used by the codec.
struct MessageSchema {
  std::string name;
  int version{1};
  std::vector<FieldSpec> fields;

  const FieldSpec* find(std::string_view field_name) const;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaParseError : public SchemaError {
 public:
  SchemaParseError(const std::string& what, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

class DuplicateSchemaError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class UnknownSchemaError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class SchemaRegistry {
 public:
  /// Throws DuplicateSchemaError when a schema of the same name exists.
  void add(MessageSchema schema);
  void add_all(std::vector<MessageSchema> schemas);

  const MessageSchema* find(const std::string& name) const;
  /// Throws UnknownSchemaError.
  const MessageSchema& at(const std::string& name) const;

  std::size_t size() const { return schemas_.size(); }
  auto begin() const { return schemas_.begin(); }
  auto end() const { return schemas_.end(); }

 private:
  std::map<std::string, MessageSchema> schemas_;
};

/// Parses the declarative schema format:
///   msg <Name> v<int> { <field>: <type>[<len>]? <unit>?; ... }
/// Types: f64 f32 i64 i32 bool string. `[]` declares a variable-length
/// array; `[n]` a fixed-length one. A `?` after the field name marks it
/// optional. `#` starts a comment. One file may hold many schemas.
std::vector<MessageSchema> parse_schema_file(std::string_view text);

/// Inverse of parse_schema_file (canonical spacing).
std::string render_schema_file(const std::vector<MessageSchema>& schemas);

}  // namespace sff::msgs
