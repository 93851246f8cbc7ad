#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "rdsim/address.hpp"

namespace rdsim {

// One RD slot: compressed sector tag, one presence bit per block of the
// sector, the 1-bit FIFO age and a valid bit.
struct RdEntry {
    std::uint64_t ctag = 0;
    std::uint64_t presence = 0;
    bool fifo_bit = false;
    bool valid = false;

    friend bool operator==(const RdEntry&, const RdEntry&) = default;
};

struct RdConfig {
    std::uint64_t rd_sets = 512;
    std::uint64_t rd_ways = 16;
    RdTagConfig tag_cfg{};

    void validate() const;

    [[nodiscard]] std::uint64_t entries() const { return rd_sets * rd_ways; }

    // Builds a config of `entries` total entries and derives the full sector
    // tag width from the address width, block size, sector size and set count.
    [[nodiscard]] static RdConfig make(std::uint64_t entries, std::uint64_t ways, std::uint64_t block_bytes,
                                       unsigned c_bits = 10, std::uint64_t sector_blocks = 2,
                                       unsigned address_bits = kDefaultAddressBits);

    // Same, with c_bits equal to the full tag width (no aliasing).
    [[nodiscard]] static RdConfig make_exact(std::uint64_t entries, std::uint64_t ways, std::uint64_t block_bytes,
                                             std::uint64_t sector_blocks = 2,
                                             unsigned address_bits = kDefaultAddressBits);
};

// Extra storage of one RD, in bits: entries x (c + sector_blocks + fifo + valid).
[[nodiscard]] std::uint64_t storage_bits(const RdConfig& cfg);

// Set-associative FIFO buffer of compressed sector tags. The set index is the
// sector number modulo rd_sets; the stored tag is the compressed remainder.
//
// Replacement is a 1-bit FIFO: fills set fifo_bit; the victim is the lowest
// way whose bit is clear, and when every bit in the set is set they are all
// cleared and way 0 is chosen. Hits never touch the age bit.
class ReuseDetector {
public:
    explicit ReuseDetector(const RdConfig& cfg);

    [[nodiscard]] const RdConfig& config() const { return cfg_; }

    [[nodiscard]] bool probe(BlockAddr block) const;
    void insert(BlockAddr block);
    // Clears the block's presence bit (dropping the entry when it empties).
    // Only used to inject faults; the management flow never removes tags.
    void erase(BlockAddr block);

    [[nodiscard]] const RdEntry& entry(std::uint64_t set, std::uint32_t way) const {
        return entries_[set * cfg_.rd_ways + way];
    }
    [[nodiscard]] std::uint64_t occupancy() const { return occupancy_; }
    // Valid entries overwritten by the FIFO so far.
    [[nodiscard]] std::uint64_t replacements() const { return replacements_; }

    struct Location {
        std::uint64_t set;
        std::uint64_t ctag;
        std::uint64_t slot;
    };
    [[nodiscard]] Location locate(BlockAddr block) const;

    // Valid entries as [{set, way, ctag, presence, fifo_bit}] in (set, way) order.
    [[nodiscard]] nlohmann::json snapshot() const;

private:
    RdEntry* row(std::uint64_t set) { return &entries_[set * cfg_.rd_ways]; }
    [[nodiscard]] const RdEntry* row(std::uint64_t set) const { return &entries_[set * cfg_.rd_ways]; }

    RdConfig cfg_;
    unsigned set_bits_;
    std::vector<RdEntry> entries_;
    std::uint64_t occupancy_ = 0;
    std::uint64_t replacements_ = 0;
};

} // namespace rdsim
