#include "mcmwc/gf256.hpp"

namespace mcmwc::gf {

namespace {

struct MulTable {
    std::array<std::uint8_t, 256 * 256> t;
    MulTable() {
        for (unsigned a = 0; a < 256; ++a)
            for (unsigned b = 0; b < 256; ++b)
                t[(a << 8) | b] = gf_mul(static_cast<FieldElement>(a),
                                         static_cast<FieldElement>(b));
    }
};

const MulTable& mul_table() {
    static const MulTable table;
    return table;
}

}  // namespace

const std::uint8_t* mul_row(FieldElement c) {
    return mul_table().t.data() + (static_cast<std::size_t>(c) << 8);
}

void payload_axpy(Payload& dst, FieldElement coeff, const Payload& src) {
    if (dst.size() != src.size()) throw std::invalid_argument("payload length mismatch");
    if (coeff == 0) return;
    const std::size_t n = dst.size();
    if (coeff == 1) {
        for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
        return;
    }
    const std::uint8_t* row = mul_row(coeff);
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= row[src[i]];
}

void payload_scale(Payload& dst, FieldElement coeff) {
    const std::uint8_t* row = mul_row(coeff);
    for (auto& v : dst) v = row[v];
}

}  // namespace mcmwc::gf
