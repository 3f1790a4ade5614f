#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ibrkit/hash.hpp"

namespace ibrkit {

// Streaming RFC 4180 reader. Rows are pulled one at a time; quoted fields may
// contain commas, escaped quotes ("") and newlines. The reader refills from
// the stream in fixed-size chunks, so peak memory is bounded by the chunk
// size plus one logical row.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, size_t chunk_size = 64 * 1024);

    enum class RowStatus { ok, malformed, end };

    // Reads the next logical row into `fields`. On malformed rows (stray text
    // after a closing quote, unterminated quote at EOF) the partial fields are
    // kept and `error` describes the problem. Completely empty lines are
    // skipped, matching common exporter behavior.
    RowStatus next_row(std::vector<std::string>& fields, std::string& error);

    // Running FNV-1a digest over every byte consumed from the stream.
    const Fnv1a64& digest() const { return digest_; }

private:
    bool refill();
    int next_char();

    std::istream& in_;
    std::vector<char> buffer_;
    size_t pos_ = 0;
    size_t len_ = 0;
    bool eof_ = false;
    Fnv1a64 digest_;
};

// Writes one row with RFC 4180 quoting; fields containing commas, quotes or
// newlines are quoted, quotes doubled.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
void write_csv_field(std::ostream& out, std::string_view field, bool first);

}  // namespace ibrkit
