#include "doctest.h"

#include "mcmwc/gf256.hpp"
#include "mcmwc/rng.hpp"

using namespace mcmwc;
using gf::FieldElement;
using gf::Payload;

namespace {

// independent bitwise long-multiplication oracle over 0x11D
FieldElement slow_mul(FieldElement a, FieldElement b) {
    unsigned acc = 0;
    unsigned aa = a;
    for (unsigned bit = 0; bit < 8; ++bit) {
        if (b & (1u << bit)) acc ^= aa << bit;
    }
    // reduce degree-14..8 terms
    for (int d = 14; d >= 8; --d) {
        if (acc & (1u << d)) acc ^= gf::kReductionPoly << (d - 8);
    }
    return static_cast<FieldElement>(acc);
}

}  // namespace

TEST_CASE("gf_mul matches the shift-and-reduce oracle on all 65536 pairs") {
    for (unsigned a = 0; a < 256; ++a)
        for (unsigned b = 0; b < 256; ++b)
            REQUIRE(gf::gf_mul(static_cast<FieldElement>(a), static_cast<FieldElement>(b)) ==
                    slow_mul(static_cast<FieldElement>(a), static_cast<FieldElement>(b)));
}

TEST_CASE("gf_mul basics") {
    CHECK(gf::gf_mul(0x53, 0) == 0);
    CHECK(gf::gf_mul(0, 0x53) == 0);
    CHECK(gf::gf_mul(0x53, 1) == 0x53);
    CHECK(gf::gf_mul(0x02, 0x80) == 0x1D);
}

TEST_CASE("gf_inv inverts every nonzero element") {
    CHECK(gf::gf_inv(1) == 1);
    CHECK_THROWS_AS(gf::gf_inv(0), std::domain_error);
    for (unsigned a = 1; a < 256; ++a)
        CHECK(gf::gf_mul(static_cast<FieldElement>(a), gf::gf_inv(static_cast<FieldElement>(a))) == 1);
}

TEST_CASE("field axioms on sampled triples") {
    Rng rng(7);
    for (int it = 0; it < 10000; ++it) {
        auto a = static_cast<FieldElement>(rng.u64());
        auto b = static_cast<FieldElement>(rng.u64());
        auto c = static_cast<FieldElement>(rng.u64());
        CHECK(gf::gf_mul(a, b) == gf::gf_mul(b, a));
        CHECK(gf::gf_mul(gf::gf_mul(a, b), c) == gf::gf_mul(a, gf::gf_mul(b, c)));
        CHECK((gf::gf_mul(a, static_cast<FieldElement>(b ^ c))) ==
              (gf::gf_mul(a, b) ^ gf::gf_mul(a, c)));
    }
}

TEST_CASE("payload_axpy") {
    Payload dst{1, 2, 3, 4}, src{5, 6, 7, 8};

    SUBCASE("coeff 0 leaves dst unchanged") {
        Payload before = dst;
        gf::payload_axpy(dst, 0, src);
        CHECK(dst == before);
    }
    SUBCASE("coeff 1 on itself cancels to zero") {
        Payload copy = dst;
        gf::payload_axpy(dst, 1, copy);
        CHECK(dst == Payload{0, 0, 0, 0});
    }
    SUBCASE("length mismatch throws") {
        Payload shorter{1, 2};
        CHECK_THROWS_AS(gf::payload_axpy(dst, 3, shorter), std::invalid_argument);
    }
    SUBCASE("random axpy matches the scalar oracle") {
        Rng rng(21);
        for (int it = 0; it < 200; ++it) {
            Payload x(32), y(32);
            for (auto& v : x) v = static_cast<std::uint8_t>(rng.u64());
            for (auto& v : y) v = static_cast<std::uint8_t>(rng.u64());
            auto coeff = static_cast<FieldElement>(rng.u64());
            Payload expect(32);
            for (std::size_t i = 0; i < 32; ++i) expect[i] = x[i] ^ slow_mul(coeff, y[i]);
            gf::payload_axpy(x, coeff, y);
            CHECK(x == expect);
        }
    }
}
