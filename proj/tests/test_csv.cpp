#include <glamer/csv.hpp>
#include <glamer/error.hpp>

#include <doctest.h>

using namespace glamer;

TEST_CASE("csv: quoted fields, BOM, blank lines")
{
    auto t = parse_csv("\xEF\xBB\xBF" "a,b\n1,\"x,y\"\n\n2,\"he said \"\"hi\"\"\"\r\n3,\"multi\nline\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.n_rows() == 3);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "he said \"hi\"");
    CHECK(t.rows[2][1] == "multi\nline");
    CHECK(t.column("b") == 1u);
    CHECK_FALSE(t.column("c").has_value());
}

TEST_CASE("csv: ragged record is a data error")
{
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), DataError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,\"open\n"), DataError);
}

TEST_CASE("csv: select_rows keeps order, quote round trip")
{
    auto t = parse_csv("v\n0\n1\n2\n");
    auto s = t.select_rows({2, 0});
    CHECK(s.rows[0][0] == "2");
    CHECK(s.rows[1][0] == "0");
    auto q = quote_csv_field("a,\"b\"");
    CHECK(parse_csv("h\n" + q + "\n").rows[0][0] == "a,\"b\"");
    CHECK(quote_csv_field("plain") == "plain");
}

TEST_CASE("csv: missing file names the path")
{
    try {
        read_text_file("/nonexistent/dir/file.csv");
        FAIL("expected throw");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/file.csv") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
}
