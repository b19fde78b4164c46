#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "foflux/csv.hpp"
#include "foflux/errors.hpp"
#include "test_util.hpp"

using namespace foflux;

TEST_SUITE("csv") {

TEST_CASE("format_full round-trips doubles exactly") {
  const std::vector<double> values = {0.0,     1.0 / 3.0, 1e-300, 6.02214076e23,
                                      -2.5e-8, 3.141592653589793,
                                      std::numeric_limits<double>::min()};
  for (double v : values) {
    const double back = parse_cell(format_full(v), "round-trip");
    CHECK(back == v);
  }
  // Signed zero survives the trip bit-for-bit.
  CHECK(std::signbit(parse_cell(format_full(-0.0), "negative zero")));
}

TEST_CASE("parse_cell rejects junk with the caller's context") {
  CHECK_THROWS_AS(parse_cell("1.2x", "col jw"), DataError);
  CHECK_THROWS_AS(parse_cell("", "col jw"), DataError);
  CHECK_THROWS_AS(parse_cell("  ", "col jw"), DataError);
  CHECK_THROWS_AS(parse_cell("nan", "col jw"), DataError);
  CHECK_THROWS_AS(parse_cell("inf", "col jw"), DataError);
  CHECK_THROWS_WITH_AS(parse_cell("oops", "col jw"),
                       doctest::Contains("col jw"), DataError);
}

TEST_CASE("write then read preserves header and cells") {
  CsvTable table;
  table.header = {"a", "b"};
  table.rows = {{"1", "x"}, {format_full(1.0 / 7.0), "y"}};
  const std::string path = scratch_path("csv_roundtrip.csv");
  write_csv(path, table);

  const CsvTable back = read_csv(path);
  CHECK(back.header == table.header);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0] == table.rows[0]);
  CHECK(parse_cell(back.rows[1][0], "cell") == 1.0 / 7.0);
}

TEST_CASE("ragged rows are rejected with the row location") {
  const std::string path = scratch_path("csv_ragged.csv");
  write_text_file(path, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(path), DataError);
}

TEST_CASE("column lookup names the missing column") {
  CsvTable table;
  table.header = {"a", "b"};
  CHECK(table.column("b") == 1);
  CHECK(table.has_column("a"));
  CHECK(!table.has_column("z"));
  CHECK_THROWS_WITH_AS(table.column("z"), doctest::Contains("z"), DataError);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(read_csv(scratch_path("does_not_exist.csv")), IoError);
}

}  // TEST_SUITE
