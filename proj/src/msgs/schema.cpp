#include "sff/msgs/schema.hpp"

#include <cctype>
#include <sstream>
#include <unordered_set>

namespace sff::msgs {

std::string_view field_type_name(FieldType t) {
  switch (t) {
    case FieldType::F64: return "f64";
    case FieldType::F32: return "f32";
    case FieldType::I64: return "i64";
    case FieldType::I32: return "i32";
    case FieldType::Bool: return "bool";
    case FieldType::String: return "string";
  }
  return "?";
}

const FieldSpec* MessageSchema::find(std::string_view field_name) const {
  for (const auto& f : fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

SchemaParseError::SchemaParseError(const std::string& what, int line, int col)
    : SchemaError(what + " (line " + std::to_string(line) + ", col " +
                  std::to_string(col) + ")"),
      line_(line),
      col_(col) {}

void SchemaRegistry::add(MessageSchema schema) {
  auto [it, inserted] = schemas_.emplace(schema.name, std::move(schema));
  if (!inserted) {
    throw DuplicateSchemaError("duplicate schema: " + it->first);
  }
}

void SchemaRegistry::add_all(std::vector<MessageSchema> schemas) {
  for (auto& s : schemas) add(std::move(s));
}

const MessageSchema* SchemaRegistry::find(const std::string& name) const {
  auto it = schemas_.find(name);
  return it == schemas_.end() ? nullptr : &it->second;
}

const MessageSchema& SchemaRegistry::at(const std::string& name) const {
  const MessageSchema* s = find(name);
  if (!s) throw UnknownSchemaError("unknown schema: " + name);
  return *s;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaParseError(what, line_, col_);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  bool consume(char c) {
    if (peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  std::string ident() {
    if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_') {
      fail("expected identifier");
    }
    std::string s;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_')) {
      s.push_back(advance());
    }
    return s;
  }

  int integer() {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) {
      fail("expected integer");
    }
    long v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (advance() - '0');
      if (v > 1'000'000'000L) fail("integer too large");
    }
    return static_cast<int>(v);
  }

  // Unit annotations allow compound tokens like m/s, N*m, rad/s, m^2.
  std::string unit_token() {
    std::string s;
    auto is_unit_char = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
             c == '/' || c == '*' || c == '^' || c == '-';
    };
    while (!eof() && is_unit_char(peek())) s.push_back(advance());
    return s;
  }

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  std::string_view text_;
  std::size_t pos_{0};
  int line_{1};
  int col_{1};
};

FieldType parse_type(Cursor& cur, const std::string& name) {
  if (name == "f64") return FieldType::F64;
  if (name == "f32") return FieldType::F32;
  if (name == "i64") return FieldType::I64;
  if (name == "i32") return FieldType::I32;
  if (name == "bool") return FieldType::Bool;
  if (name == "string") return FieldType::String;
  cur.fail("unknown type '" + name + "'");
}

FieldSpec parse_field(Cursor& cur) {
  FieldSpec f;
  f.name = cur.ident();
  cur.skip_ws_and_comments();
  if (cur.consume('?')) {
    f.required = false;
    cur.skip_ws_and_comments();
  }
  cur.expect(':');
  cur.skip_ws_and_comments();
  f.type = parse_type(cur, cur.ident());
  if (cur.peek() == '[') {
    cur.advance();
    cur.skip_ws_and_comments();
    if (cur.peek() == ']') {
      f.is_array = true;
      f.array_len = -1;
    } else {
      f.is_array = true;
      f.array_len = cur.integer();
      if (f.array_len <= 0) cur.fail("array length must be positive");
      cur.skip_ws_and_comments();
    }
    cur.expect(']');
    if (f.type == FieldType::String) cur.fail("string arrays are not supported");
  }
  cur.skip_ws_and_comments();
  if (cur.peek() != ';' && cur.peek() != '}') {
    f.unit = cur.unit_token();
    if (f.unit.empty()) cur.fail("expected ';', '}' or unit annotation");
  }
  return f;
}

MessageSchema parse_msg(Cursor& cur) {
  MessageSchema m;
  m.name = cur.ident();
  cur.skip_ws_and_comments();
  const int vline = cur.line(), vcol = cur.col();
  const std::string vtag = cur.ident();
  if (vtag.size() < 2 || vtag[0] != 'v' ||
      vtag.find_first_not_of("0123456789", 1) != std::string::npos) {
    throw SchemaParseError("expected version tag v<int>", vline, vcol);
  }
  m.version = std::stoi(vtag.substr(1));
  if (m.version < 1) throw SchemaParseError("version must be >= 1", vline, vcol);
  cur.skip_ws_and_comments();
  cur.expect('{');
  cur.skip_ws_and_comments();

  std::unordered_set<std::string> seen;
  while (cur.peek() != '}') {
    const int fline = cur.line(), fcol = cur.col();
    FieldSpec f = parse_field(cur);
    if (!seen.insert(f.name).second) {
      throw SchemaParseError("duplicate field '" + f.name + "' in " + m.name,
                             fline, fcol);
    }
    m.fields.push_back(std::move(f));
    cur.skip_ws_and_comments();
    if (cur.consume(';')) {
      cur.skip_ws_and_comments();
    } else if (cur.peek() != '}') {
      cur.fail("expected ';' or '}'");
    }
  }
  cur.expect('}');
  if (m.fields.empty()) cur.fail("schema '" + m.name + "' has no fields");
  return m;
}

}  // namespace

std::vector<MessageSchema> parse_schema_file(std::string_view text) {
  Cursor cur(text);
  std::vector<MessageSchema> out;
  std::unordered_set<std::string> names;
  for (;;) {
    cur.skip_ws_and_comments();
    if (cur.eof()) break;
    const int mline = cur.line(), mcol = cur.col();
    const std::string kw = cur.ident();
    if (kw != "msg") {
      throw SchemaParseError("expected 'msg'", mline, mcol);
    }
    cur.skip_ws_and_comments();
    MessageSchema m = parse_msg(cur);
    if (!names.insert(m.name).second) {
      throw SchemaParseError("duplicate schema '" + m.name + "'", mline, mcol);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string render_schema_file(const std::vector<MessageSchema>& schemas) {
  std::ostringstream os;
  for (const auto& m : schemas) {
    os << "msg " << m.name << " v" << m.version << " {";
    for (std::size_t i = 0; i < m.fields.size(); ++i) {
      const auto& f = m.fields[i];
      os << ' ' << f.name << (f.required ? "" : "?") << ": "
         << field_type_name(f.type);
      if (f.is_array) {
        os << '[';
        if (f.array_len > 0) os << f.array_len;
        os << ']';
      }
      if (!f.unit.empty()) os << ' ' << f.unit;
      if (i + 1 < m.fields.size()) os << ';';
    }
    os << " }\n";
  }
  return os.str();
}

}  // namespace sff::msgs
