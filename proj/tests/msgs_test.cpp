#include "sff/msgs/builtin.hpp"
#include "sff/msgs/codec.hpp"
#include "sff/msgs/convert.hpp"
#include "sff/msgs/schema.hpp"

#include <doctest.h>

#include <random>

using namespace sff::msgs;

namespace {

// Schema-driven random value generator shared with the acceptance suite.
MessageValue random_value(const MessageSchema& schema, std::mt19937& rng) {
  std::uniform_real_distribution<double> ud(-1e6, 1e6);
  std::uniform_int_distribution<std::int64_t> ui64(-4'000'000'000'000LL,
                                                   4'000'000'000'000LL);
  std::uniform_int_distribution<std::int32_t> ui32(-2'000'000'000,
                                                   2'000'000'000);
  std::uniform_int_distribution<int> ulen(0, 8);
  std::uniform_int_distribution<int> uchar('a', 'z');
  std::bernoulli_distribution ub(0.5);

  MessageValue v(schema.name);
  for (const auto& f : schema.fields) {
    const int len = f.is_array ? (f.array_len >= 0 ? f.array_len : ulen(rng)) : 1;
    auto fill = [&](auto gen) {
      using T = decltype(gen());
      if (!f.is_array) {
        v.set(f.name, gen());
      } else {
        std::vector<T> arr;
        for (int i = 0; i < len; ++i) arr.push_back(gen());
        v.set(f.name, std::move(arr));
      }
    };
    switch (f.type) {
      case FieldType::F64: fill([&] { return ud(rng); }); break;
      case FieldType::F32: fill([&] { return static_cast<float>(ud(rng)); }); break;
      case FieldType::I64: fill([&] { return ui64(rng); }); break;
      case FieldType::I32: fill([&] { return ui32(rng); }); break;
      case FieldType::Bool: fill([&] { return ub(rng); }); break;
      case FieldType::String: {
        std::string s;
        for (int i = 0; i < ulen(rng); ++i) s.push_back(static_cast<char>(uchar(rng)));
        v.set(f.name, std::move(s));
        break;
      }
    }
  }
  return v;
}

}  // namespace

TEST_CASE("parser handles the state schema declaration") {
  const auto schemas = parse_schema_file(
      "msg SCStates v1 { p_h: f64[3] m; v_h: f64[3] m/s; q_hb: f64[4]; "
      "omega_b: f64[3] rad/s; stamp_ns: i64 ns }");
  REQUIRE(schemas.size() == 1);
  const auto& m = schemas[0];
  CHECK(m.name == "SCStates");
  CHECK(m.version == 1);
  REQUIRE(m.fields.size() == 5);
  CHECK(m.fields[0].name == "p_h");
  CHECK(m.fields[0].type == FieldType::F64);
  CHECK(m.fields[0].array_len == 3);
  CHECK(m.fields[0].unit == "m");
  CHECK(m.fields[1].unit == "m/s");
  CHECK(m.fields[2].unit.empty());
  CHECK(m.fields[4].type == FieldType::I64);
  CHECK_FALSE(m.fields[4].is_array);
}

TEST_CASE("parser edge cases") {
  CHECK(parse_schema_file("").empty());
  CHECK(parse_schema_file("  # just a comment\n").empty());

  CHECK_THROWS_AS(parse_schema_file("msg X v1 { a: f64; a: f64 }"),
                  SchemaParseError);
  CHECK_THROWS_AS(parse_schema_file("msg X v1 { a: f77 }"), SchemaParseError);
  CHECK_THROWS_AS(parse_schema_file("msg X v1 { }"), SchemaParseError);
  CHECK_THROWS_AS(parse_schema_file("msg X v0 { a: f64 }"), SchemaParseError);
  CHECK_THROWS_AS(
      parse_schema_file("msg X v1 { a: f64 }\nmsg X v1 { b: f64 }"),
      SchemaParseError);
  CHECK_THROWS_AS(parse_schema_file("msg X v1 { s: string[3] }"),
                  SchemaParseError);

  try {
    parse_schema_file("msg X v1 {\n  a: f64;\n  a: i32\n}");
    FAIL("expected parse error");
  } catch (const SchemaParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("duplicate field") != std::string::npos);
  }

  const auto opt = parse_schema_file("msg Z v1 { a?: i32; xs: f64[] km }");
  CHECK_FALSE(opt[0].fields[0].required);
  CHECK(opt[0].fields[1].is_array);
  CHECK(opt[0].fields[1].array_len == -1);
  CHECK(opt[0].fields[1].unit == "km");
}

TEST_CASE("parse and render are mutually stable") {
  const auto first = parse_schema_file(builtin_schema_text());
  const std::string rendered = render_schema_file(first);
  const auto second = parse_schema_file(rendered);
  CHECK(render_schema_file(second) == rendered);
  CHECK(second.size() == first.size());
}

TEST_CASE("registry rejects duplicates and reports unknowns") {
  SchemaRegistry reg;
  reg.add_all(parse_schema_file("msg A v1 { x: f64 }"));
  CHECK_THROWS_AS(reg.add_all(parse_schema_file("msg A v2 { y: f64 }")),
                  DuplicateSchemaError);
  CHECK(reg.find("B") == nullptr);
  CHECK_THROWS_AS(reg.at("B"), UnknownSchemaError);
}

TEST_CASE("encode writes declaration-ordered json") {
  const auto reg = builtin_registry();
  MessageValue v("SCStates");
  v.set("stamp_ns", std::int64_t{0});
  v.set("omega_b", std::vector<double>{0, 0, 0});
  v.set("q_hb", std::vector<double>{1, 0, 0, 0});
  v.set("v_h", std::vector<double>{0, 0, 0});
  v.set("p_h", std::vector<double>{0, 0, 0});
  const std::string bytes = encode(v, reg);
  CHECK(bytes ==
        R"({"p_h":[0.0,0.0,0.0],"v_h":[0.0,0.0,0.0],"q_hb":[1.0,0.0,0.0,0.0],)"
        R"("omega_b":[0.0,0.0,0.0],"stamp_ns":0})");
  // Deterministic: same value, same bytes.
  CHECK(encode(v, reg) == bytes);
}

TEST_CASE("decode inverts encode") {
  const auto reg = builtin_registry();
  std::mt19937 rng(17);
  for (const auto& [name, schema] : reg) {
    for (int i = 0; i < 50; ++i) {
      const MessageValue v = random_value(schema, rng);
      const MessageValue back = decode(encode(v, reg), schema);
      CHECK(back == v);
    }
  }
}

TEST_CASE("validation failures name the offending fields") {
  const auto reg = builtin_registry();
  const auto& schema = reg.at("SCStates");

  MessageValue v("SCStates");
  v.set("p_h", std::vector<double>{0, 0, 0});
  try {
    encode(v, reg);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() == 4);  // v_h, q_hb, omega_b, stamp_ns missing
    CHECK(std::string(e.what()).find("v_h") != std::string::npos);
  }

  try {
    decode("{}", schema);
    FAIL("expected mismatch");
  } catch (const SchemaMismatchError& e) {
    CHECK(e.issues().size() == 5);
  }

  // Wrong quaternion array length.
  CHECK_THROWS_AS(
      decode(R"({"p_h":[0,0,0],"v_h":[0,0,0],"q_hb":[1,0,0],)"
             R"("omega_b":[0,0,0],"stamp_ns":0})",
             schema),
      SchemaMismatchError);

  // Non-integer where i64 expected.
  CHECK_THROWS_AS(
      decode(R"({"p_h":[0,0,0],"v_h":[0,0,0],"q_hb":[1,0,0,0],)"
             R"("omega_b":[0,0,0],"stamp_ns":1.5})",
             schema),
      SchemaMismatchError);

  CHECK_THROWS_AS(decode("{not json", schema), JsonSyntaxError);

  MessageValue bad("SCStates");
  bad.set("p_h", std::vector<double>{0, 0, std::nan("")});
  bad.set("v_h", std::vector<double>{0, 0, 0});
  bad.set("q_hb", std::vector<double>{1, 0, 0, 0});
  bad.set("omega_b", std::vector<double>{0, 0, 0});
  bad.set("stamp_ns", std::int64_t{0});
  CHECK_THROWS_AS(encode(bad, reg), ValidationError);
}

TEST_CASE("strict decode rejects unknown keys, lenient ignores them") {
  const auto reg = builtin_registry();
  const auto& schema = reg.at("Clock");
  const std::string extra = R"({"sim_time_ns":5,"spurious":1})";
  CHECK_THROWS_AS(decode(extra, schema), SchemaMismatchError);
  const MessageValue v = decode(extra, schema, DecodeMode::Lenient);
  CHECK(v.get<std::int64_t>("sim_time_ns") == 5);
  CHECK(v.fields.size() == 1);
}

TEST_CASE("state conversion round trip") {
  using namespace sff::dynamics;
  const auto reg = builtin_registry();
  RigidBodyState x;
  x.p_h = Vec3(1.5, -0.3, 0.2);
  x.v_h = Vec3(0.01, 0.02, -0.03);
  x.q_hb = Quat::from_yaw(0.7);
  x.omega_b = Vec3(0.0, 0.0, 0.1);

  const auto v = to_scstates(x, 123456789);
  const auto decoded = decode(encode(v, reg), reg.at("SCStates"));
  std::int64_t stamp = 0;
  const RigidBodyState y = from_scstates(decoded, &stamp);
  CHECK(stamp == 123456789);
  CHECK((y.to_vector() - x.to_vector()).norm() == 0.0);
}

TEST_CASE("predicted trajectory conversion round trip") {
  using namespace sff::dynamics;
  const auto reg = builtin_registry();
  StampedTrajectory traj;
  traj.agent = "f1";
  traj.stamp_ns = 42;
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 5; ++k) {
    traj.t_ns.push_back(42 + k * 200'000'000LL);
    RigidBodyState s;
    s.p_h = Vec3(u(rng), u(rng), u(rng));
    s.v_h = Vec3(u(rng), u(rng), u(rng));
    s.q_hb = Quat{1 + u(rng), u(rng), u(rng), u(rng)}.normalized();
    s.omega_b = Vec3(u(rng), u(rng), u(rng));
    traj.states.push_back(s);
  }
  const auto v = to_predicted_trajectory(traj);
  const auto back =
      from_predicted_trajectory(decode(encode(v, reg), reg.at("PredictedTrajectory")));
  CHECK(back.agent == traj.agent);
  CHECK(back.stamp_ns == traj.stamp_ns);
  CHECK(back.t_ns == traj.t_ns);
  REQUIRE(back.states.size() == traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    CHECK((back.states[k].to_vector() - traj.states[k].to_vector()).norm() == 0.0);
  }
}
