#include <catch_amalgamated.hpp>

#include "retrace/csv.hpp"
#include "retrace/util.hpp"
#include "test_support.hpp"

using namespace retrace;

TEST_CASE("doi normalization strips resolver prefixes and case") {
  CHECK(normalize_doi("https://doi.org/10.1000/ABC") == "10.1000/abc");
  CHECK(normalize_doi("  doi:10.1000/x ") == "10.1000/x");
  CHECK(normalize_doi("http://dx.doi.org/10.1/Y") == "10.1/y");
  CHECK(normalize_doi("10.1/z") == "10.1/z");
}

TEST_CASE("title normalization collapses punctuation") {
  CHECK(normalize_title("  The Sacred, and the Profane!  ") == "the sacred and the profane");
}

TEST_CASE("sha256 of known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("percent and fixed formatting") {
  CHECK(percent(39, 170) == Catch::Approx(22.94));
  CHECK(percent(1, 0) == 0.0);
  CHECK(format_fixed(18.4210, 2) == "18.42");
}

TEST_CASE("atomic write and json round trip") {
  testing::TempDir dir;
  auto p = dir / "sub/x.json";
  write_json(p, Json{{"a", 1}});
  CHECK(read_json(p)["a"] == 1);
  write_file_atomic(p, "replaced");
  CHECK(read_file(p) == "replaced");
  CHECK_THROWS_AS(read_file(dir / "missing"), NotFoundError);
}

TEST_CASE("validation error keeps field messages") {
  ValidationError e(std::map<std::string, std::string>{{"k", "must be positive"}});
  CHECK(e.fields().at("k") == "must be positive");
}

TEST_CASE("csv parses quotes, doubled quotes and embedded newlines") {
  auto t = csv::parse("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n2,\"line1\nline2\",\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[0][2] == "say \"hi\"");
  CHECK(t.rows[1][1] == "line1\nline2");
  CHECK(t.rows[1][2].empty());
  CHECK(t.column("c") == 2u);
  CHECK_FALSE(t.column("z"));
}

TEST_CASE("csv write then parse is identity") {
  csv::Table t{{"h1", "h2"}, {{"plain", "with,comma"}, {"q\"uote", "multi\nline"}}};
  auto back = csv::parse(csv::write(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
}

TEST_CASE("csv sniffs tab separated headers") {
  CHECK(csv::sniff_separator("a\tb\tc\n1\t2\t3") == '\t');
  CHECK(csv::sniff_separator("a,b\n") == ',');
}
