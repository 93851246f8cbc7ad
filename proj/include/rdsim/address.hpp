#pragma once

#include <compare>
#include <cstdint>

namespace rdsim {

using Addr = std::uint64_t;

// Physical address width assumed when deriving tag widths.
inline constexpr unsigned kDefaultAddressBits = 48;

[[nodiscard]] constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

[[nodiscard]] constexpr unsigned log2_exact(std::uint64_t v) {
    unsigned n = 0;
    while (v > 1) {
        v >>= 1;
        ++n;
    }
    return n;
}

// Block number: byte address >> log2(block_bytes).
struct BlockAddr {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(const BlockAddr&, const BlockAddr&) = default;
};

struct Geometry {
    std::uint64_t block_bytes = 64;
    std::uint64_t sets = 1;
    std::uint64_t ways = 1;

    // Throws ConfigError when block_bytes or sets is not a power of two, or ways == 0.
    void validate() const;

    [[nodiscard]] std::uint64_t capacity_bytes() const { return block_bytes * sets * ways; }
    [[nodiscard]] unsigned offset_bits() const { return log2_exact(block_bytes); }
    [[nodiscard]] unsigned set_bits() const { return log2_exact(sets); }

    // Capacity string like "32K:8" or "1M:16" with the given block size.
    [[nodiscard]] static Geometry from_capacity(std::uint64_t capacity_bytes, std::uint64_t ways,
                                                std::uint64_t block_bytes = 64);

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct Decomposed {
    std::uint64_t tag = 0;
    std::uint64_t set = 0;
    std::uint64_t offset = 0;

    friend bool operator==(const Decomposed&, const Decomposed&) = default;
};

[[nodiscard]] Decomposed decompose(Addr addr, const Geometry& geom);
[[nodiscard]] Addr recompose(const Decomposed& parts, const Geometry& geom);

[[nodiscard]] inline BlockAddr block_of(Addr addr, const Geometry& geom) {
    return BlockAddr{addr >> geom.offset_bits()};
}

// Tag/set split of a block number (what the caches index with).
[[nodiscard]] inline std::uint64_t set_of(BlockAddr b, const Geometry& geom) { return b.value & (geom.sets - 1); }
[[nodiscard]] inline std::uint64_t tag_of(BlockAddr b, const Geometry& geom) { return b.value >> geom.set_bits(); }
[[nodiscard]] inline BlockAddr block_from(std::uint64_t tag, std::uint64_t set, const Geometry& geom) {
    return BlockAddr{(tag << geom.set_bits()) | set};
}

// Reuse Detector tag handling: a full tag of t_bits is XOR-folded into c_bits.
// c_bits == t_bits disables compression (exact tags).
struct RdTagConfig {
    unsigned t_bits = 32;
    unsigned c_bits = 10;
    std::uint64_t sector_blocks = 2;

    void validate() const;

    [[nodiscard]] bool exact() const { return c_bits == t_bits; }

    friend bool operator==(const RdTagConfig&, const RdTagConfig&) = default;
};

struct SectorPos {
    std::uint64_t sector = 0;
    std::uint64_t slot = 0;

    friend bool operator==(const SectorPos&, const SectorPos&) = default;
};

[[nodiscard]] SectorPos sector_of(BlockAddr block, const RdTagConfig& cfg);

// Splits full_tag (masked to t_bits) into c_bits pieces from the least
// significant end, zero-padding the top piece, and XORs the pieces together.
[[nodiscard]] std::uint64_t compress_tag(std::uint64_t full_tag, const RdTagConfig& cfg);

} // namespace rdsim
