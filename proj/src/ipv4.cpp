#include "ibrkit/ipv4.hpp"

#include <charconv>

namespace ibrkit {

namespace {

// Parses a decimal number of at most three digits; rejects empty and non-digit
// input. Returns -1 on failure.
int parse_octet(std::string_view text) {
    if (text.empty() || text.size() > 3) return -1;
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return -1;
        value = value * 10 + (c - '0');
    }
    return value <= 255 ? value : -1;
}

}  // namespace

std::optional<Ipv4> parse_ipv4(std::string_view text) {
    uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        size_t dot = text.find('.');
        std::string_view part = (i < 3) ? text.substr(0, dot) : text;
        if (i < 3 && dot == std::string_view::npos) return std::nullopt;
        int octet = parse_octet(part);
        if (octet < 0) return std::nullopt;
        value = (value << 8) | static_cast<uint32_t>(octet);
        if (i < 3) text.remove_prefix(dot + 1);
    }
    return Ipv4{value};
}

std::string format_ipv4(Ipv4 ip) {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        if (shift != 24) out.push_back('.');
        out += std::to_string((ip.value >> shift) & 0xff);
    }
    return out;
}

std::optional<Cidr> parse_cidr(std::string_view text) {
    size_t slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto addr = parse_ipv4(text.substr(0, slash));
    if (!addr) return std::nullopt;
    std::string_view len_text = text.substr(slash + 1);
    unsigned length = 0;
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || length > 32) {
        return std::nullopt;
    }
    uint8_t len8 = static_cast<uint8_t>(length);
    return Cidr{addr->value & prefix_mask(len8), len8};
}

std::string format_cidr(const Cidr& cidr) {
    return format_ipv4(Ipv4{cidr.network}) + "/" + std::to_string(cidr.length);
}

}  // namespace ibrkit
