#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "ibrkit/csv.hpp"

using namespace ibrkit;

namespace {

struct ParsedRow {
    std::vector<std::string> fields;
    bool malformed = false;

    bool operator==(const ParsedRow&) const = default;
};

std::vector<ParsedRow> parse_all(const std::string& text, size_t chunk_size = 64 * 1024) {
    std::istringstream in(text);
    CsvReader reader(in, chunk_size);
    std::vector<ParsedRow> rows;
    std::vector<std::string> fields;
    std::string error;
    for (;;) {
        auto status = reader.next_row(fields, error);
        if (status == CsvReader::RowStatus::end) break;
        rows.push_back({fields, status == CsvReader::RowStatus::malformed});
    }
    return rows;
}

}  // namespace

TEST_CASE("csv splits plain rows") {
    auto rows = parse_all("a,b,c\n1,2,3\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].fields == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1].fields == std::vector<std::string>{"1", "2", "3"});
    CHECK_FALSE(rows[0].malformed);
}

TEST_CASE("csv keeps quoted commas in one field") {
    auto rows = parse_all("Org\n\"Acme, Inc.\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields == std::vector<std::string>{"Acme, Inc."});
}

TEST_CASE("csv unescapes doubled quotes") {
    auto rows = parse_all("a\n\"say \"\"hi\"\"\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields == std::vector<std::string>{"say \"hi\""});
}

TEST_CASE("csv keeps newlines inside quoted fields") {
    auto rows = parse_all("a,b\n\"line1\nline2\",x\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields == std::vector<std::string>{"line1\nline2", "x"});
}

TEST_CASE("csv skips blank lines and handles crlf") {
    auto rows = parse_all("a,b\r\n\r\n1,2\r\n\n3,4");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].fields == std::vector<std::string>{"1", "2"});
    CHECK(rows[2].fields == std::vector<std::string>{"3", "4"});
}

TEST_CASE("csv last row without trailing newline") {
    auto rows = parse_all("a,b\n1,2");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields == std::vector<std::string>{"1", "2"});
}

TEST_CASE("csv empty trailing field") {
    auto rows = parse_all("a,b\n1,\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields == std::vector<std::string>{"1", ""});
}

TEST_CASE("csv flags unterminated quote") {
    auto rows = parse_all("a\n\"oops\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].malformed);
}

TEST_CASE("csv flags stray text after closing quote") {
    auto rows = parse_all("a,b\n\"x\"y,2\nnext,row\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].malformed);
    // The bad row is consumed up to its line end; parsing resumes cleanly.
    CHECK_FALSE(rows[2].malformed);
    CHECK(rows[2].fields == std::vector<std::string>{"next", "row"});
}

TEST_CASE("csv parse is chunk-size invariant") {
    std::string text = "h1,h2,h3\n";
    for (int i = 0; i < 50; ++i) {
        text += "v" + std::to_string(i) + ",\"q,\"\"" + std::to_string(i * 7) +
                "\"\"\n tail\",z\n";
    }
    auto reference = parse_all(text);
    std::string reference_digest;
    {
        std::istringstream in(text);
        CsvReader reader(in);
        std::vector<std::string> fields;
        std::string error;
        while (reader.next_row(fields, error) != CsvReader::RowStatus::end) {
        }
        reference_digest = reader.digest().hex();
    }
    for (size_t chunk : {size_t{1}, size_t{2}, size_t{3}, size_t{17}, size_t{4096}}) {
        CHECK(parse_all(text, chunk) == reference);
        std::istringstream in(text);
        CsvReader reader(in, chunk);
        std::vector<std::string> fields;
        std::string error;
        while (reader.next_row(fields, error) != CsvReader::RowStatus::end) {
        }
        CHECK(reader.digest().hex() == reference_digest);
    }
}

TEST_CASE("csv writer quotes only when needed and round-trips") {
    std::vector<std::vector<std::string>> rows = {
        {"plain", "with,comma", "with\"quote", "with\nnewline", ""},
        {"x", "y", "z", "", "trailing"},
    };
    std::ostringstream out;
    for (const auto& row : rows) write_csv_row(out, row);
    std::string text = out.str();
    CHECK(text.find("plain") == 0);  // unquoted simple field

    auto parsed = parse_all(text);
    REQUIRE(parsed.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK_FALSE(parsed[i].malformed);
        CHECK(parsed[i].fields == rows[i]);
    }
}

TEST_CASE("csv digest tracks content") {
    std::istringstream a("a,b\n1,2\n"), b("a,b\n1,3\n");
    CsvReader ra(a), rb(b);
    std::vector<std::string> fields;
    std::string error;
    while (ra.next_row(fields, error) != CsvReader::RowStatus::end) {
    }
    while (rb.next_row(fields, error) != CsvReader::RowStatus::end) {
    }
    CHECK(ra.digest().hex() != rb.digest().hex());
    CHECK(ra.digest().hex().size() == 16);
}
