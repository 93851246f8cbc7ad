#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdsim/address.hpp"
#include "rdsim/errors.hpp"

namespace rdsim {

enum class CacheRole { PrivateInclusive, SharedNonInclusive };

// Residency record for one way. `reuse` is only ever true in private caches.
// `pc` is the PC of the last instruction that wrote the block (or filled it,
// if it was never written); the DASCA-lite signature is derived from it.
struct CacheLine {
    std::uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    bool reuse = false;
    std::uint32_t lru_rank = 0; // 0 = MRU
    Addr pc = 0;

    friend bool operator==(const CacheLine&, const CacheLine&) = default;
};

struct CacheConfig {
    Geometry geometry;
    CacheRole role = CacheRole::PrivateInclusive;
    std::uint32_t read_latency_cycles = 1;
    std::uint32_t write_latency_cycles = 1;

    void validate() const;
};

// Set-associative write-back cache with true LRU. Ranks within a set are a
// permutation 0..valid-1 over the valid lines. The shared role cannot carry
// reuse bits: set_reuse() does not exist for it and insert() clears the flag.
template <CacheRole Role>
class SetAssocCache {
public:
    static constexpr CacheRole role = Role;

    explicit SetAssocCache(const CacheConfig& cfg);

    [[nodiscard]] const CacheConfig& config() const { return cfg_; }
    [[nodiscard]] const Geometry& geometry() const { return cfg_.geometry; }
    [[nodiscard]] std::uint64_t sets() const { return cfg_.geometry.sets; }
    [[nodiscard]] std::uint64_t ways() const { return cfg_.geometry.ways; }

    [[nodiscard]] std::optional<std::uint32_t> lookup(std::uint64_t set, std::uint64_t tag) const;

    // Installs `line` at MRU. Returns the LRU line if the set was full.
    std::optional<CacheLine> insert(std::uint64_t set, CacheLine line);

    void touch(std::uint64_t set, std::uint32_t way);
    void mark_dirty(std::uint64_t set, std::uint32_t way);
    void set_reuse(std::uint64_t set, std::uint32_t way, bool value)
        requires(Role == CacheRole::PrivateInclusive);
    void set_pc(std::uint64_t set, std::uint32_t way, Addr pc);
    CacheLine invalidate(std::uint64_t set, std::uint32_t way);

    [[nodiscard]] const CacheLine& line(std::uint64_t set, std::uint32_t way) const;
    [[nodiscard]] std::uint64_t valid_count() const { return valid_; }

    // Block-level convenience wrappers.
    [[nodiscard]] std::optional<std::uint32_t> find(BlockAddr b) const {
        return lookup(set_of(b, geometry()), tag_of(b, geometry()));
    }
    [[nodiscard]] BlockAddr block_at(std::uint64_t set, std::uint32_t way) const {
        return block_from(line(set, way).tag, set, geometry());
    }

    // Per non-empty set, its ways in way order: {set, lines: [{way, tag, dirty, reuse, lru}]}.
    [[nodiscard]] nlohmann::json snapshot() const;

private:
    CacheLine& at(std::uint64_t set, std::uint32_t way) { return lines_[set * ways() + way]; }
    CacheLine& checked(std::uint64_t set, std::uint32_t way, const char* op);

    CacheConfig cfg_;
    std::vector<CacheLine> lines_;
    std::vector<std::uint32_t> set_fill_;
    std::uint64_t valid_ = 0;
};

using PrivateCache = SetAssocCache<CacheRole::PrivateInclusive>;
using SharedCache = SetAssocCache<CacheRole::SharedNonInclusive>;

extern template class SetAssocCache<CacheRole::PrivateInclusive>;
extern template class SetAssocCache<CacheRole::SharedNonInclusive>;

} // namespace rdsim
