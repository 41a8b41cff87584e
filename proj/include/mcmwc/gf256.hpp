#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

// GF(2^8) arithmetic with reduction polynomial x^8+x^4+x^3+x^2+1 (0x11D) and
// generator 0x02, via log/antilog tables built at compile time. Payload kernels
// use a derived 256x256 product table.

namespace mcmwc::gf {

using FieldElement = std::uint8_t;
using Payload = std::vector<std::uint8_t>;

inline constexpr unsigned kReductionPoly = 0x11D;

namespace detail {

struct Tables {
    std::array<std::uint8_t, 256> exp{};
    std::array<std::uint8_t, 256> log{};
};

consteval Tables build_tables() {
    Tables t{};
    unsigned x = 1;
    for (unsigned i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<std::uint8_t>(x);
        t.log[x] = static_cast<std::uint8_t>(i);
        x <<= 1;
        if (x & 0x100u) x ^= kReductionPoly;
    }
    t.exp[255] = t.exp[0];
    return t;
}

inline constexpr Tables tables = build_tables();

}  // namespace detail

constexpr FieldElement gf_mul(FieldElement a, FieldElement b) {
    if (a == 0 || b == 0) return 0;
    unsigned s = detail::tables.log[a] + detail::tables.log[b];
    if (s >= 255) s -= 255;
    return detail::tables.exp[s];
}

constexpr FieldElement gf_inv(FieldElement a) {
    if (a == 0) throw std::domain_error("no inverse of zero");
    unsigned l = detail::tables.log[a];
    return detail::tables.exp[(255 - l) % 255];
}

// Row of the full product table: row[c][x] = gf_mul(c, x).
const std::uint8_t* mul_row(FieldElement c);

// dst[i] ^= coeff * src[i]. Lengths must match.
void payload_axpy(Payload& dst, FieldElement coeff, const Payload& src);

// dst[i] = coeff * dst[i]. One full table pass regardless of coeff.
void payload_scale(Payload& dst, FieldElement coeff);

}  // namespace mcmwc::gf
