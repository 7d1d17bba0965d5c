#include <cmath>

#include <doctest.h>

#include "classtalk/errors.hpp"
#include "classtalk/transcript.hpp"

using namespace classtalk;

namespace {

std::vector<Utterance> rows(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<Utterance> out;
  for (const auto& [s, t] : items) out.push_back({out.size(), s, t, std::nullopt, std::nullopt});
  return out;
}

}  // namespace

TEST_SUITE("transcript") {

TEST_CASE("construction keeps row order") {
  Transcript t("a", {}, rows({{"T", "hi"}, {"S", "hello"}}));
  REQUIRE(t.size() == 2);
  CHECK(t[0].speaker == "T");
  CHECK(t[1].text == "hello");
}

TEST_CASE("row indices must be contiguous from zero") {
  auto u = rows({{"T", "a"}, {"S", "b"}});
  u[1].row_index = 5;
  CHECK_THROWS_AS(Transcript("a", {}, u), PreconditionError);
}

TEST_CASE("inverted time spans are rejected with the row") {
  auto u = rows({{"T", "a"}, {"S", "b"}});
  u[1].start_time = 4.0;
  u[1].end_time = 3.0;
  try {
    Transcript("a", {}, u);
    FAIL("expected RowError");
  } catch (const RowError& e) {
    CHECK(e.row_index() == 1);
  }
}

TEST_CASE("columns must be total over rows") {
  Column c{"x", ValueDomain::numeric(), {Value{1.0}}};
  CHECK_THROWS_AS(Transcript("a", {}, rows({{"T", "a"}, {"S", "b"}}), {c}), PreconditionError);
}

TEST_CASE("columns may not shadow mapped columns or repeat") {
  const auto u = rows({{"T", "a"}});
  CHECK_THROWS(Transcript("a", {}, u, {Column{"speaker", {}, {Value{}}}}));
  CHECK_THROWS(Transcript("a", {}, u,
                          {Column{"x", {}, {Value{}}}, Column{"x", {}, {Value{}}}}));
}

TEST_CASE("with_column adds then replaces") {
  Transcript t("a", {}, rows({{"T", "a"}, {"S", "b"}}));
  auto t2 = t.with_column({"f", ValueDomain::numeric(), {Value{1.0}, Value{}}});
  CHECK_FALSE(t.has_column("f"));
  REQUIRE(t2.has_column("f"));
  CHECK(is_null(t2.annotation(1, "f")));
  auto t3 = t2.with_column({"f", ValueDomain::numeric(), {Value{2.0}, Value{3.0}}});
  CHECK(t3.columns().size() == 1);
  CHECK(std::get<double>(t3.annotation(0, "f")) == 2.0);
  CHECK_THROWS_AS(t.column("missing"), SchemaError);
}

TEST_CASE("output_columns lists the source header first") {
  Transcript t("a", {}, rows({{"T", "a"}}), {Column{"note", {}, {Value{std::string("x")}}}},
               {"text", "speaker", "note"});
  auto t2 = t.with_column({"f", ValueDomain::numeric(), {Value{1.0}}});
  CHECK(t2.output_columns() == std::vector<std::string>{"text", "speaker", "note", "f"});
  Transcript bare("b", {}, rows({{"T", "a"}}));
  CHECK(bare.output_columns() == std::vector<std::string>{"speaker", "text"});
}

TEST_CASE("with_rows_reset nulls every cell") {
  Transcript t("a", {}, rows({{"T", "a"}, {"S", "b"}}),
               {Column{"f", ValueDomain::numeric(), {Value{1.0}, Value{2.0}}}});
  auto r = t.with_rows_reset(rows({{"T", "a b"}}));
  REQUIRE(r.size() == 1);
  CHECK(is_null(r.annotation(0, "f")));
}

TEST_CASE("as_number reads numbers and numeric text") {
  CHECK(as_number(Value{2.5}, "c", 0) == 2.5);
  CHECK(as_number(Value{std::string("3")}, "c", 0) == 3.0);
  CHECK_FALSE(as_number(Value{}, "c", 0).has_value());
  CHECK_FALSE(as_number(Value{std::string("NaN")}, "c", 0).has_value());
  CHECK_FALSE(as_number(Value{std::string("")}, "c", 0).has_value());
  CHECK_THROWS_AS(as_number(Value{std::string("abc")}, "c", 0), SchemaError);
}

TEST_CASE("format_number round-trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.125, 1.0 / 3.0}) {
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK(format_number(7.0) == "7");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(parse_number("+4") == 4.0);
  CHECK_FALSE(parse_number("4x").has_value());
  CHECK_FALSE(parse_number("").has_value());
}

TEST_CASE("ColumnMapping validation") {
  ColumnMapping m;
  CHECK_NOTHROW(m.validate());
  m.text_column = "speaker";
  CHECK_THROWS_AS(m.validate(), ConfigError);
  ColumnMapping half;
  half.start_time_column = "start";
  CHECK_FALSE(half.has_times());
}

TEST_CASE("label domain membership") {
  const auto d = ValueDomain::labels(7);
  CHECK(d.contains_label(0));
  CHECK(d.contains_label(6));
  CHECK_FALSE(d.contains_label(7));
  CHECK_FALSE(d.contains_label(1.5));
  CHECK_FALSE(d.contains_label(-1));
}

}  // TEST_SUITE
