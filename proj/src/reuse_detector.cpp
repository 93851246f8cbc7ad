#include "rdsim/reuse_detector.hpp"

#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

void RdConfig::validate() const {
    if (!is_pow2(rd_sets)) {
        throw ConfigError("RD set count must be a power of two, got " + std::to_string(rd_sets));
    }
    if (rd_ways == 0) {
        throw ConfigError("RD associativity must be at least 1");
    }
    tag_cfg.validate();
    if (tag_cfg.sector_blocks > 64) {
        throw ConfigError("RD sectors are limited to 64 blocks");
    }
}

RdConfig RdConfig::make(std::uint64_t entries, std::uint64_t ways, std::uint64_t block_bytes, unsigned c_bits,
                        std::uint64_t sector_blocks, unsigned address_bits) {
    if (ways == 0 || entries % ways != 0) {
        throw ConfigError("RD entries (" + std::to_string(entries) + ") must be a multiple of its ways (" +
                          std::to_string(ways) + ")");
    }
    if (!is_pow2(block_bytes) || !is_pow2(sector_blocks)) {
        throw ConfigError("RD block and sector sizes must be powers of two");
    }
    RdConfig cfg;
    cfg.rd_sets = entries / ways;
    cfg.rd_ways = ways;
    if (!is_pow2(cfg.rd_sets)) {
        throw ConfigError("RD set count must be a power of two, got " + std::to_string(cfg.rd_sets));
    }
    const unsigned used = log2_exact(block_bytes) + log2_exact(sector_blocks) + log2_exact(cfg.rd_sets);
    if (used >= address_bits) {
        throw ConfigError("RD geometry leaves no tag bits in a " + std::to_string(address_bits) + "-bit address");
    }
    cfg.tag_cfg = RdTagConfig{address_bits - used, c_bits, sector_blocks};
    if (c_bits > cfg.tag_cfg.t_bits) {
        cfg.tag_cfg.c_bits = cfg.tag_cfg.t_bits;
    }
    cfg.validate();
    return cfg;
}

RdConfig RdConfig::make_exact(std::uint64_t entries, std::uint64_t ways, std::uint64_t block_bytes,
                              std::uint64_t sector_blocks, unsigned address_bits) {
    RdConfig cfg = make(entries, ways, block_bytes, 64, sector_blocks, address_bits);
    cfg.tag_cfg.c_bits = cfg.tag_cfg.t_bits;
    return cfg;
}

std::uint64_t storage_bits(const RdConfig& cfg) {
    return cfg.rd_sets * cfg.rd_ways * (cfg.tag_cfg.c_bits + cfg.tag_cfg.sector_blocks + 2);
}

ReuseDetector::ReuseDetector(const RdConfig& cfg)
    : cfg_(cfg), set_bits_(log2_exact(cfg.rd_sets)), entries_(cfg.rd_sets * cfg.rd_ways) {
    cfg_.validate();
}

ReuseDetector::Location ReuseDetector::locate(BlockAddr block) const {
    const SectorPos pos = sector_of(block, cfg_.tag_cfg);
    return Location{
        .set = pos.sector & (cfg_.rd_sets - 1),
        .ctag = compress_tag(pos.sector >> set_bits_, cfg_.tag_cfg),
        .slot = pos.slot,
    };
}

bool ReuseDetector::probe(BlockAddr block) const {
    const Location loc = locate(block);
    const RdEntry* r = row(loc.set);
    const std::uint64_t bit = std::uint64_t{1} << loc.slot;
    for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
        if (r[w].valid && r[w].ctag == loc.ctag) {
            return (r[w].presence & bit) != 0;
        }
    }
    return false;
}

void ReuseDetector::insert(BlockAddr block) {
    const Location loc = locate(block);
    RdEntry* r = row(loc.set);
    const std::uint64_t bit = std::uint64_t{1} << loc.slot;
    for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
        if (r[w].valid && r[w].ctag == loc.ctag) {
            r[w].presence |= bit;
            return;
        }
    }

    std::uint64_t victim = cfg_.rd_ways;
    for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
        if (!r[w].fifo_bit) {
            victim = w;
            break;
        }
    }
    if (victim == cfg_.rd_ways) {
        for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
            r[w].fifo_bit = false;
        }
        victim = 0;
    }
    if (r[victim].valid) {
        ++replacements_;
    } else {
        ++occupancy_;
    }
    r[victim] = RdEntry{.ctag = loc.ctag, .presence = bit, .fifo_bit = true, .valid = true};
}

void ReuseDetector::erase(BlockAddr block) {
    const Location loc = locate(block);
    RdEntry* r = row(loc.set);
    for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
        if (r[w].valid && r[w].ctag == loc.ctag) {
            r[w].presence &= ~(std::uint64_t{1} << loc.slot);
            if (r[w].presence == 0) {
                r[w] = RdEntry{};
                --occupancy_;
            }
            return;
        }
    }
}

nlohmann::json ReuseDetector::snapshot() const {
    nlohmann::json out = nlohmann::json::array();
    for (std::uint64_t s = 0; s < cfg_.rd_sets; ++s) {
        const RdEntry* r = row(s);
        for (std::uint64_t w = 0; w < cfg_.rd_ways; ++w) {
            if (r[w].valid) {
                out.push_back({{"set", s},
                               {"way", w},
                               {"ctag", r[w].ctag},
                               {"presence", r[w].presence},
                               {"fifo_bit", r[w].fifo_bit}});
            }
        }
    }
    return out;
}

} // namespace rdsim
