#include "ibrkit/csv.hpp"

namespace ibrkit {

CsvReader::CsvReader(std::istream& in, size_t chunk_size)
    : in_(in), buffer_(chunk_size == 0 ? 1 : chunk_size) {}

bool CsvReader::refill() {
    if (eof_) return false;
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    len_ = static_cast<size_t>(in_.gcount());
    pos_ = 0;
    if (len_ == 0) {
        eof_ = true;
        return false;
    }
    digest_.update(buffer_.data(), len_);
    return true;
}

int CsvReader::next_char() {
    if (pos_ >= len_ && !refill()) return -1;
    return static_cast<unsigned char>(buffer_[pos_++]);
}

CsvReader::RowStatus CsvReader::next_row(std::vector<std::string>& fields, std::string& error) {
    fields.clear();
    error.clear();

    enum class State { row_start, field_start, unquoted, quoted, quote_seen };
    State state = State::row_start;
    std::string field;
    bool malformed = false;

    auto end_field = [&]() {
        fields.push_back(std::move(field));
        field.clear();
    };

    for (;;) {
        int ci = next_char();
        if (ci < 0) {
            switch (state) {
                case State::row_start:
                    return RowStatus::end;
                case State::quoted:
                    error = "unterminated quoted field";
                    end_field();
                    return RowStatus::malformed;
                case State::field_start:
                case State::unquoted:
                case State::quote_seen:
                    end_field();
                    return malformed ? RowStatus::malformed : RowStatus::ok;
            }
        }
        char c = static_cast<char>(ci);

        switch (state) {
            case State::row_start:
                if (c == '\n') continue;  // skip blank lines
                if (c == '\r') continue;
                state = State::field_start;
                [[fallthrough]];
            case State::field_start:
                if (c == '"') {
                    state = State::quoted;
                } else if (c == ',') {
                    end_field();
                } else if (c == '\n') {
                    // \r\n already stripped of \r below; a bare field ends the row
                    end_field();
                    return malformed ? RowStatus::malformed : RowStatus::ok;
                } else if (c == '\r') {
                    // swallow; the matching \n terminates the row
                } else {
                    field.push_back(c);
                    state = State::unquoted;
                }
                break;
            case State::unquoted:
                if (c == ',') {
                    end_field();
                    state = State::field_start;
                } else if (c == '\n') {
                    if (!field.empty() && field.back() == '\r') field.pop_back();
                    end_field();
                    return malformed ? RowStatus::malformed : RowStatus::ok;
                } else {
                    field.push_back(c);
                }
                break;
            case State::quoted:
                if (c == '"') {
                    state = State::quote_seen;
                } else {
                    field.push_back(c);
                }
                break;
            case State::quote_seen:
                if (c == '"') {
                    field.push_back('"');
                    state = State::quoted;
                } else if (c == ',') {
                    end_field();
                    state = State::field_start;
                } else if (c == '\n') {
                    end_field();
                    return malformed ? RowStatus::malformed : RowStatus::ok;
                } else if (c == '\r') {
                    // wait for the \n
                } else {
                    // RFC 4180 forbids text after a closing quote; keep parsing
                    // to the end of the line so the row is consumed, but report
                    // it malformed.
                    malformed = true;
                    error = "text after closing quote";
                    field.push_back(c);
                    state = State::unquoted;
                }
                break;
        }
    }
}

void write_csv_field(std::ostream& out, std::string_view field, bool first) {
    if (!first) out.put(',');
    bool needs_quoting = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quoting) {
        out.write(field.data(), static_cast<std::streamsize>(field.size()));
        return;
    }
    out.put('"');
    for (char c : field) {
        if (c == '"') out.put('"');
        out.put(c);
    }
    out.put('"');
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        write_csv_field(out, fields[i], i == 0);
    }
    out.put('\n');
}

}  // namespace ibrkit
