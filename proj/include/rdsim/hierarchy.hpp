#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "rdsim/cache.hpp"
#include "rdsim/dasca.hpp"
#include "rdsim/energy.hpp"
#include "rdsim/reuse_detector.hpp"
#include "rdsim/stats.hpp"
#include "rdsim/trace.hpp"

namespace rdsim {

enum class Policy { Baseline, ReuseDetector, DascaLite };

[[nodiscard]] std::string to_string(Policy p);
// Accepts "baseline", "rd", "reuse-detector", "dasca", "dasca-lite".
[[nodiscard]] Policy parse_policy(const std::string& s);

// Deliberate bugs for exercising the golden-example harness.
struct DebugFaults {
    bool reuse_on_mm_fill = false;   // main-memory fills set the reuse bit
    bool rd_erase_on_hit = false;    // an RD hit removes the block from the RD
};

struct HierarchyConfig {
    std::uint32_t cores = 1;
    CacheConfig l1;
    std::optional<CacheConfig> l2;
    CacheConfig sllc;
    std::optional<RdConfig> rd;
    Policy policy = Policy::Baseline;
    DascaConfig dasca{};
    TimingParams timing{};
    std::uint32_t sllc_banks = 1;
    // Whether updating a block already in the SLLC promotes it to MRU.
    bool touch_on_update = true;
    DebugFaults faults{};

    // Throws ConfigError.
    void validate() const;

    // 32KB/8-way L1, 256KB/16-way L2, 1MB/16-way SLLC slice per core, 64B blocks,
    // one SLLC bank per core, 8K-entry 16-way RD.
    [[nodiscard]] static HierarchyConfig standard(std::uint32_t cores, Policy policy);
};

enum class ServedFrom { L1, L2, SLLC, PeerCache, MainMemory };

[[nodiscard]] std::string to_string(ServedFrom s);

struct AccessOutcome {
    ServedFrom served_from = ServedFrom::L1;
    std::uint64_t latency_cycles = 0;
};

// A block leaving a core's last private level, with the L1 copy folded in.
struct EvictedBlock {
    BlockAddr block{};
    bool dirty = false;
    bool reuse = false;
    Addr pc = 0;
};

enum class EvictAction { InsertSLLC, UpdateSLLC, BypassToMM, Discard };

[[nodiscard]] std::string to_string(EvictAction a);

struct EvictOutcome {
    EvictAction action = EvictAction::Discard;
    bool bypassed = false;   // the policy kept the block out of the SLLC
    bool rd_filled = false;  // the block's tag was written into the RD
    bool rd_hit = false;
};

// Test and debugging hook; every callback defaults to a no-op.
class HierarchyObserver {
public:
    virtual ~HierarchyObserver() = default;
    virtual void on_private_eviction(std::uint32_t /*core*/, const EvictedBlock& /*block*/,
                                     const EvictOutcome& /*outcome*/) {}
    // A block left the SLLC (LRU eviction, or invalidation of a stale copy).
    virtual void on_sllc_departure(BlockAddr /*block*/, bool /*dirty*/, std::uint32_t /*hits*/,
                                   bool /*invalidated*/) {}
    virtual void on_mm_write(BlockAddr /*block*/) {}
};

// Presence directory: which cores hold a block in their private levels, and
// which one (if any) holds it dirty.
struct DirectoryEntry {
    std::uint64_t sharers = 0;
    std::optional<std::uint32_t> dirty_owner;
};

// Multi-core hierarchy: per-core private L1 (and optional L2) caches, an
// optional per-core Reuse Detector between the last private level and a
// shared non-inclusive LLC, a presence directory and main memory.
//
// Requests follow the reuse-bit flow: private hits leave the bit alone, SLLC
// hits and peer-cache supplies set it, main-memory fills clear it. A block
// leaving the last private level is offered to the SLLC according to the
// policy (baseline, Reuse Detector or DASCA-lite). SLLC hits do not remove the
// SLLC copy. Writes invalidate other cores' private copies.
class Hierarchy {
public:
    explicit Hierarchy(HierarchyConfig cfg);

    [[nodiscard]] const HierarchyConfig& config() const { return cfg_; }

    AccessOutcome handle_access(const AccessEvent& ev);
    EvictOutcome handle_l2_eviction(std::uint32_t core, const EvictedBlock& victim);

    // Validates and replays the whole trace, then returns the final stats
    // (with end-of-run SLLC residency folded in).
    SimStats run(std::span<const AccessEvent> trace);

    [[nodiscard]] const SimStats& stats() const { return stats_; }
    // Stats with the still-resident never-hit SLLC lines counted.
    [[nodiscard]] SimStats final_stats() const;

    void set_observer(HierarchyObserver* obs) { observer_ = obs; }

    [[nodiscard]] const PrivateCache& l1(std::uint32_t core) const { return cores_.at(core).l1; }
    [[nodiscard]] const PrivateCache* l2(std::uint32_t core) const {
        const auto& c = cores_.at(core);
        return c.l2 ? &*c.l2 : nullptr;
    }
    [[nodiscard]] const ReuseDetector* rd(std::uint32_t core) const {
        const auto& c = cores_.at(core);
        return c.rd ? &*c.rd : nullptr;
    }
    [[nodiscard]] const SharedCache& sllc() const { return sllc_; }
    [[nodiscard]] const DascaPredictor* dasca() const { return dasca_ ? &*dasca_ : nullptr; }
    [[nodiscard]] std::optional<DirectoryEntry> directory(BlockAddr b) const;
    [[nodiscard]] std::size_t directory_size() const { return directory_.size(); }
    [[nodiscard]] std::uint32_t sllc_hits_at(std::uint64_t set, std::uint32_t way) const {
        return sllc_line_hits_.at(set * sllc_.ways() + way);
    }

    // Full state: caches, RDs, directory.
    [[nodiscard]] nlohmann::json snapshot() const;

    // Cross-checks directory, inclusion and dirty-owner bookkeeping against the
    // cache contents. Returns one message per inconsistency (empty when sound).
    [[nodiscard]] std::vector<std::string> audit() const;

private:
    struct CoreState {
        PrivateCache l1;
        std::optional<PrivateCache> l2;
        std::optional<ReuseDetector> rd;
        std::uint64_t now = 0;
    };

    [[nodiscard]] bool holds(std::uint32_t core, BlockAddr b) const;
    [[nodiscard]] bool holds_dirty(std::uint32_t core, BlockAddr b) const;
    void fill_private(std::uint32_t core, BlockAddr b, bool reuse, Addr pc, std::uint64_t when);
    void set_reuse_everywhere(std::uint32_t core, BlockAddr b);
    void invalidate_peers(std::uint32_t writer, BlockAddr b);
    void write_down_to_l2(CoreState& cs, const CacheLine& l1_victim, BlockAddr b);
    void sllc_departure(BlockAddr b, const CacheLine& line, std::uint32_t hits, bool invalidated);
    void mm_write(std::uint32_t core, BlockAddr b);
    [[nodiscard]] std::uint32_t bank_of(std::uint64_t sllc_set) const {
        return static_cast<std::uint32_t>(sllc_set % cfg_.sllc_banks);
    }

    void dir_add(std::uint32_t core, BlockAddr b);
    void dir_remove(std::uint32_t core, BlockAddr b);

    HierarchyConfig cfg_;
    std::vector<CoreState> cores_;
    SharedCache sllc_;
    std::vector<std::uint32_t> sllc_line_hits_;
    std::optional<DascaPredictor> dasca_;
    BankTimer banks_;
    std::unordered_map<std::uint64_t, DirectoryEntry> directory_;
    SimStats stats_;
    HierarchyObserver* observer_ = nullptr;
    std::uint64_t evict_time_ = 0;
};

void to_json(nlohmann::json& j, const HierarchyConfig& cfg);

} // namespace rdsim
