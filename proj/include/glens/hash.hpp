#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace glens {

// FNV-1a 64-bit; stable across platforms, used for dataset and model fingerprints.
class Fingerprint {
public:
    Fingerprint& add(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        // Field separator so ("ab","c") and ("a","bc") differ.
        state_ ^= 0xff;
        state_ *= 0x100000001b3ULL;
        return *this;
    }
    Fingerprint& add(std::int64_t v) { return add(std::to_string(v)); }
    Fingerprint& add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return add(std::to_string(bits));
    }

    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fingerprint::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace glens
