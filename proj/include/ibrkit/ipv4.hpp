#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ibrkit {

// IPv4 address kept as a host-order integer so ordering matches numeric
// dotted-quad order.
struct Ipv4 {
    uint32_t value = 0;

    auto operator<=>(const Ipv4&) const = default;
};

std::optional<Ipv4> parse_ipv4(std::string_view text);
std::string format_ipv4(Ipv4 ip);

// Network mask for a prefix length in [0, 32].
constexpr uint32_t prefix_mask(uint8_t length) {
    return length == 0 ? 0u : ~uint32_t{0} << (32 - length);
}

// IPv4 CIDR prefix. The network address is stored pre-masked, so host bits in
// the input are dropped at parse time.
struct Cidr {
    uint32_t network = 0;
    uint8_t length = 0;

    bool contains(Ipv4 ip) const { return (ip.value & prefix_mask(length)) == network; }

    auto operator<=>(const Cidr&) const = default;
};

std::optional<Cidr> parse_cidr(std::string_view text);
std::string format_cidr(const Cidr& cidr);

}  // namespace ibrkit
