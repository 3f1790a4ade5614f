#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace ibrkit {

// FNV-1a 64-bit running hash. Used as the input digest recorded in run
// metadata; not a cryptographic hash.
class Fnv1a64 {
public:
    void update(const void* data, size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ull;
        }
    }

    uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace ibrkit
