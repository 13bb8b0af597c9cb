#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

namespace vloc {

/// 64-bit FNV-1a accumulator.
class Fnv1a {
public:
    Fnv1a& bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
            bytes(&b, 1);
        }
        return *this;
    }
    Fnv1a& f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }
    Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()); }

    std::uint64_t value() const { return state_; }
    std::string hex() const { return to_hex(state_); }

    static std::string to_hex(std::uint64_t v) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    Fnv1a h;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        h.bytes(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

}  // namespace vloc
