#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace rdsim {

// Field list shared by the per-core counters, their sum and serialisation.
#define RDSIM_CORE_COUNTERS(X)                                                                                         \
    X(accesses)                                                                                                        \
    X(reads)                                                                                                           \
    X(writes)                                                                                                          \
    X(instructions)                                                                                                    \
    X(cycles)                                                                                                          \
    X(l1_hits)                                                                                                         \
    X(l2_hits)                                                                                                         \
    X(sllc_hits)                                                                                                       \
    X(sllc_misses)                                                                                                     \
    X(peer_supplies)                                                                                                   \
    X(sllc_writes)                                                                                                     \
    X(sllc_insertions)                                                                                                 \
    X(sllc_updates)                                                                                                    \
    X(private_evictions)                                                                                               \
    X(bypasses)                                                                                                        \
    X(rd_fills)                                                                                                        \
    X(rd_hits)                                                                                                         \
    X(mm_reads)                                                                                                        \
    X(mm_writes)                                                                                                       \
    X(coherence_invalidations)                                                                                         \
    X(sllc_bank_stall_cycles)                                                                                          \
    X(sllc_write_occupancy_cycles)

// Counters attributed to one core. SLLC hits/misses go to the requesting
// core, SLLC writes and bypasses to the core whose private eviction caused them.
struct CoreStats {
#define RDSIM_DECLARE(name) std::uint64_t name = 0;
    RDSIM_CORE_COUNTERS(RDSIM_DECLARE)
#undef RDSIM_DECLARE

    CoreStats& operator+=(const CoreStats& o);
    friend CoreStats operator+(CoreStats a, const CoreStats& b) { return a += b; }
    friend bool operator==(const CoreStats&, const CoreStats&) = default;
};

// Shared-cache residency outcomes (not attributable to a single core).
struct SllcResidencyStats {
    std::uint64_t evictions = 0;             // replaced by LRU
    std::uint64_t unreused_evictions = 0;    // ... without a single hit while resident
    std::uint64_t stale_invalidations = 0;   // copies dropped because a dirty bypass made them stale
    std::uint64_t unreused_invalidations = 0;
    std::uint64_t resident_unreused = 0;     // still resident at end of run, never hit

    // SLLC insertions that never served a hit.
    [[nodiscard]] std::uint64_t unreused_insertions() const {
        return unreused_evictions + unreused_invalidations + resident_unreused;
    }

    SllcResidencyStats& operator+=(const SllcResidencyStats& o);
    friend bool operator==(const SllcResidencyStats&, const SllcResidencyStats&) = default;
};

struct SimStats {
    std::vector<CoreStats> cores;
    SllcResidencyStats sllc;

    SimStats() = default;
    explicit SimStats(std::size_t n) : cores(n) {}

    [[nodiscard]] CoreStats total() const;
    // Wall-clock length of the run: the slowest core's cycle count.
    [[nodiscard]] std::uint64_t elapsed_cycles() const;

    // Component-wise sum; both operands must have the same core count.
    SimStats& operator+=(const SimStats& o);

    friend bool operator==(const SimStats&, const SimStats&) = default;
};

void to_json(nlohmann::json& j, const CoreStats& s);
void to_json(nlohmann::json& j, const SllcResidencyStats& s);
void to_json(nlohmann::json& j, const SimStats& s);

} // namespace rdsim
