#include "doctest.h"

#include <vector>

#include "rdsim/address.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/rng.hpp"

using namespace rdsim;

namespace {

// Splits by repeated division instead of shifts and folds from the most
// significant piece down, so it shares no code path with compress_tag.
std::uint64_t fold_reversed(std::uint64_t tag, unsigned t_bits, unsigned c_bits) {
    std::uint64_t modulus = 1;
    for (unsigned i = 0; i < c_bits; ++i) {
        modulus *= 2;
    }
    std::uint64_t full = 1;
    for (unsigned i = 0; i < t_bits && i < 63; ++i) {
        full *= 2;
    }
    if (t_bits < 64) {
        tag %= full;
    }
    std::vector<std::uint64_t> pieces;
    const unsigned count = (t_bits + c_bits - 1) / c_bits;
    for (unsigned i = 0; i < count; ++i) {
        pieces.push_back(tag % modulus);
        tag /= modulus;
    }
    std::uint64_t acc = 0;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
        acc ^= *it;
    }
    return acc;
}

} // namespace

TEST_CASE("decompose examples") {
    const Geometry g{64, 1024, 1};
    CHECK(decompose(0, g) == Decomposed{0, 0, 0});
    CHECK(decompose(0x10040, g) == Decomposed{1, 1, 0});
    CHECK(decompose(0x3F, g) == Decomposed{0, 0, 0x3F});
}

TEST_CASE("decompose round-trips on random addresses and geometries") {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        const Geometry g{std::uint64_t{1} << uniform_below(rng, 10), std::uint64_t{1} << uniform_below(rng, 16),
                         1 + uniform_below(rng, 32)};
        const Addr a = rng() >> uniform_below(rng, 64);
        const Decomposed d = decompose(a, g);
        REQUIRE(d.offset < g.block_bytes);
        REQUIRE(d.set < g.sets);
        REQUIRE(((d.tag * g.sets + d.set) * g.block_bytes) + d.offset == a);
        REQUIRE(recompose(d, g) == a);
        const BlockAddr b = block_of(a, g);
        REQUIRE(block_from(tag_of(b, g), set_of(b, g), g) == b);
    }
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(Geometry({48, 4, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(Geometry({64, 3, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(Geometry({64, 4, 0}).validate(), ConfigError);
    const Geometry g = Geometry::from_capacity(32 * 1024, 8, 64);
    CHECK(g.sets == 64);
    CHECK(g.capacity_bytes() == 32 * 1024);
}

TEST_CASE("sector_of examples") {
    CHECK(sector_of(BlockAddr{0}, RdTagConfig{32, 10, 2}).sector == 0);
    CHECK(sector_of(BlockAddr{0}, RdTagConfig{32, 10, 2}).slot == 0);
    CHECK(sector_of(BlockAddr{7}, RdTagConfig{32, 10, 2}).sector == 3);
    CHECK(sector_of(BlockAddr{7}, RdTagConfig{32, 10, 2}).slot == 1);
    CHECK(sector_of(BlockAddr{7}, RdTagConfig{32, 10, 4}).sector == 1);
    CHECK(sector_of(BlockAddr{7}, RdTagConfig{32, 10, 4}).slot == 3);
}

TEST_CASE("compress_tag examples") {
    CHECK(compress_tag(0, RdTagConfig{32, 10, 2}) == 0);
    CHECK(compress_tag(0xAC, RdTagConfig{8, 4, 1}) == 0x6);
    CHECK(compress_tag(0b10'1010'1100, RdTagConfig{10, 4, 1}) == 0b0100);
    CHECK(compress_tag(0xAC, RdTagConfig{8, 4, 1}) == (0xAu ^ 0xCu));
}

TEST_CASE("compress_tag matches a reversed-order fold") {
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
        const unsigned t = 1 + static_cast<unsigned>(uniform_below(rng, 48));
        const unsigned c = 1 + static_cast<unsigned>(uniform_below(rng, t));
        const std::uint64_t tag = rng() & ((std::uint64_t{1} << t) - 1);
        const RdTagConfig cfg{t, c, 2};
        const std::uint64_t got = compress_tag(tag, cfg);
        REQUIRE(got == fold_reversed(tag, t, c));
        REQUIRE(got < (std::uint64_t{1} << c));
        if (c == t) {
            REQUIRE(got == tag);
        }
    }
}

TEST_CASE("blocks of one sector share sector and compressed tag but not slot") {
    Rng rng(13);
    const RdTagConfig cfg{30, 10, 4};
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t base = (rng() >> 20) & ~std::uint64_t{3};
        const std::uint64_t a = uniform_below(rng, 4);
        const std::uint64_t b = (a + 1 + uniform_below(rng, 3)) % 4;
        const SectorPos pa = sector_of(BlockAddr{base + a}, cfg);
        const SectorPos pb = sector_of(BlockAddr{base + b}, cfg);
        REQUIRE(pa.sector == pb.sector);
        REQUIRE(compress_tag(pa.sector, cfg) == compress_tag(pb.sector, cfg));
        REQUIRE(pa.slot != pb.slot);
    }
}

TEST_CASE("rd tag config validation") {
    CHECK_NOTHROW(RdTagConfig{}.validate());
    CHECK_THROWS_AS(RdTagConfig({10, 11, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(RdTagConfig({10, 0, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(RdTagConfig({10, 4, 3}).validate(), ConfigError);
}
