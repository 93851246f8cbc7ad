#include "rdsim/address.hpp"

#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

std::uint64_t low_mask(unsigned bits) {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

} // namespace

void Geometry::validate() const {
    if (!is_pow2(block_bytes)) {
        throw ConfigError("block size must be a power of two, got " + std::to_string(block_bytes));
    }
    if (!is_pow2(sets)) {
        throw ConfigError("set count must be a power of two, got " + std::to_string(sets));
    }
    if (ways == 0) {
        throw ConfigError("associativity must be at least 1");
    }
}

Geometry Geometry::from_capacity(std::uint64_t capacity_bytes, std::uint64_t ways, std::uint64_t block_bytes) {
    if (ways == 0 || block_bytes == 0 || capacity_bytes % (ways * block_bytes) != 0) {
        throw ConfigError("capacity " + std::to_string(capacity_bytes) + " is not divisible into " +
                          std::to_string(ways) + " ways of " + std::to_string(block_bytes) + "B blocks");
    }
    Geometry g{block_bytes, capacity_bytes / (ways * block_bytes), ways};
    g.validate();
    return g;
}

Decomposed decompose(Addr addr, const Geometry& geom) {
    const unsigned ob = geom.offset_bits();
    const unsigned sb = geom.set_bits();
    return Decomposed{
        .tag = addr >> (ob + sb),
        .set = (addr >> ob) & (geom.sets - 1),
        .offset = addr & (geom.block_bytes - 1),
    };
}

Addr recompose(const Decomposed& parts, const Geometry& geom) {
    return ((parts.tag * geom.sets + parts.set) * geom.block_bytes) + parts.offset;
}

void RdTagConfig::validate() const {
    if (c_bits < 1 || c_bits > t_bits || t_bits > 64) {
        throw ConfigError("RD tag widths require 1 <= c_bits <= t_bits <= 64 (c=" + std::to_string(c_bits) +
                          ", t=" + std::to_string(t_bits) + ")");
    }
    if (!is_pow2(sector_blocks)) {
        throw ConfigError("sector size must be a power of two, got " + std::to_string(sector_blocks));
    }
}

SectorPos sector_of(BlockAddr block, const RdTagConfig& cfg) {
    return SectorPos{block.value / cfg.sector_blocks, block.value % cfg.sector_blocks};
}

std::uint64_t compress_tag(std::uint64_t full_tag, const RdTagConfig& cfg) {
    std::uint64_t rest = full_tag & low_mask(cfg.t_bits);
    if (cfg.c_bits >= 64) {
        return rest;
    }
    const std::uint64_t piece_mask = low_mask(cfg.c_bits);
    std::uint64_t folded = 0;
    while (rest != 0) {
        folded ^= rest & piece_mask;
        rest >>= cfg.c_bits;
    }
    return folded;
}

} // namespace rdsim
