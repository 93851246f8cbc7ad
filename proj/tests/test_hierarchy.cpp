#include "doctest.h"

#include <map>
#include <string>

#include "rdsim/errors.hpp"
#include "rdsim/golden.hpp"
#include "rdsim/hierarchy.hpp"
#include "rdsim/rng.hpp"
#include "rdsim/synthetic.hpp"
#include "support.hpp"

using namespace rdsim;

namespace {

constexpr Addr kPc = 0x400000;

AccessEvent rd_ev(std::uint32_t core, std::uint64_t block) {
    return AccessEvent{core, kPc, block * 64, AccessKind::Read, 1};
}

AccessEvent wr_ev(std::uint32_t core, std::uint64_t block) {
    return AccessEvent{core, kPc, block * 64, AccessKind::Write, 1};
}

// One direct-mapped frame per core, no L2, one 4-way SLLC set.
HierarchyConfig tiny(std::uint32_t cores, Policy policy) {
    HierarchyConfig cfg;
    cfg.cores = cores;
    cfg.l1 = CacheConfig{Geometry{64, 1, 1}, CacheRole::PrivateInclusive, 2, 2};
    cfg.sllc = CacheConfig{Geometry{64, 1, 4}, CacheRole::SharedNonInclusive, 6, 17};
    cfg.rd = RdConfig::make_exact(2, 2, 64, 1);
    cfg.policy = policy;
    cfg.sllc_banks = 1;
    return cfg;
}

std::optional<CacheLine> private_line(const PrivateCache& c, BlockAddr b) {
    if (auto w = c.find(b)) {
        return c.line(set_of(b, c.geometry()), *w);
    }
    return std::nullopt;
}

std::optional<CacheLine> sllc_line(const Hierarchy& h, BlockAddr b) {
    if (auto w = h.sllc().find(b)) {
        return h.sllc().line(set_of(b, h.sllc().geometry()), *w);
    }
    return std::nullopt;
}

bool held_dirty_privately(const Hierarchy& h, BlockAddr b) {
    for (std::uint32_t c = 0; c < h.config().cores; ++c) {
        auto l1 = private_line(h.l1(c), b);
        if (l1 && l1->dirty) {
            return true;
        }
        if (const PrivateCache* l2 = h.l2(c)) {
            auto l = private_line(*l2, b);
            if (l && l->dirty) {
                return true;
            }
        }
    }
    return false;
}

// Tracks where the newest value of every written block lives: a dirty
// private copy, a dirty SLLC copy, or main memory. A write resets the set to
// the writer; copies are added as write-backs carry the value down and removed
// as they disappear. An empty set means a value was lost.
class DirtyTracker : public HierarchyObserver {
public:
    static constexpr unsigned kPriv = 1;
    static constexpr unsigned kSllc = 2;
    static constexpr unsigned kMem = 4;

    explicit DirtyTracker(const Hierarchy& h) : h_(h) {}

    void on_private_eviction(std::uint32_t, const EvictedBlock& v, const EvictOutcome& out) override {
        if (!v.dirty) {
            return;
        }
        unsigned& where = holders_[v.block.value];
        switch (out.action) {
        case EvictAction::InsertSLLC:
        case EvictAction::UpdateSLLC:
            where |= kSllc;
            break;
        case EvictAction::BypassToMM:
            if (last_mm_ != v.block.value) {
                fail("bypassed dirty block " + std::to_string(v.block.value) + " never reached memory");
            }
            where |= kMem;
            break;
        case EvictAction::Discard:
            fail("dirty block " + std::to_string(v.block.value) + " discarded");
            break;
        }
        if (!held_dirty_privately(h_, v.block)) {
            where &= ~kPriv;
        }
    }

    void on_sllc_departure(BlockAddr b, bool dirty, std::uint32_t, bool) override {
        auto it = holders_.find(b.value);
        if (it == holders_.end() || (it->second & kSllc) == 0) {
            return;
        }
        if (!dirty) {
            fail("newest copy of " + std::to_string(b.value) + " left the SLLC clean");
        }
        it->second &= ~kSllc;
        if (it->second == 0) {
            fail("value of block " + std::to_string(b.value) + " lost on SLLC departure");
        }
    }

    void on_mm_write(BlockAddr b) override {
        last_mm_ = b.value;
        auto it = holders_.find(b.value);
        // Only a write-back of the newest SLLC copy makes memory current.
        if (it != holders_.end() && (it->second & kSllc) != 0) {
            it->second |= kMem;
        }
    }

    void after_access(const AccessEvent& ev) {
        if (ev.kind == AccessKind::Write) {
            holders_[block_of(ev.addr, h_.l1(0).geometry()).value] = kPriv;
        }
        for (const auto& [blk, where] : holders_) {
            const BlockAddr b{blk};
            if (where == 0) {
                fail("block " + std::to_string(blk) + " has no current copy");
            }
            if ((where & kPriv) && !held_dirty_privately(h_, b)) {
                fail("block " + std::to_string(blk) + " lost its dirty private copy silently");
            }
            if (where & kSllc) {
                auto l = sllc_line(h_, b);
                if (!l || !l->dirty) {
                    fail("block " + std::to_string(blk) + " lost its dirty SLLC copy silently");
                }
            }
        }
    }

    std::vector<std::string> problems;

private:
    void fail(std::string msg) { problems.push_back(std::move(msg)); }

    const Hierarchy& h_;
    std::map<std::uint64_t, unsigned> holders_;
    std::uint64_t last_mm_ = ~std::uint64_t{0};
};

std::vector<HierarchyConfig> config_variants(Rng& rng, std::uint32_t cores) {
    std::vector<HierarchyConfig> out;
    for (Policy p : {Policy::Baseline, Policy::ReuseDetector, Policy::DascaLite}) {
        HierarchyConfig cfg = testing::small_config(cores, p, bernoulli(rng, 0.7));
        cfg.touch_on_update = bernoulli(rng, 0.5);
        out.push_back(cfg);
    }
    return out;
}

} // namespace

TEST_CASE("golden example replays exactly") {
    const GoldenResult r = run_golden();
    CHECK(r.passed());
    CHECK(r.matched == 8);
}

TEST_CASE("golden harness catches injected faults") {
    DebugFaults f;
    f.reuse_on_mm_fill = true;
    GoldenResult r = run_golden(f);
    REQUIRE(r.divergence);
    CHECK(r.divergence->access == 1);
    CHECK(r.divergence->component == "L1_0");

    DebugFaults g;
    g.rd_erase_on_hit = true;
    r = run_golden(g);
    REQUIRE(r.divergence);
    CHECK(r.divergence->access == 6);
    CHECK(r.divergence->component == "RD_1");
}

TEST_CASE("memory fills clear the reuse bit and SLLC hits set it without removing the SLLC copy") {
    Hierarchy h(tiny(1, Policy::Baseline));
    CHECK(h.handle_access(rd_ev(0, 1)).served_from == ServedFrom::MainMemory);
    CHECK_FALSE(private_line(h.l1(0), BlockAddr{1})->reuse);
    h.handle_access(rd_ev(0, 2));
    REQUIRE(sllc_line(h, BlockAddr{1}));
    CHECK(h.handle_access(rd_ev(0, 1)).served_from == ServedFrom::SLLC);
    CHECK(private_line(h.l1(0), BlockAddr{1})->reuse);
    CHECK(sllc_line(h, BlockAddr{1}));
    CHECK(sllc_line(h, BlockAddr{2}));
    // Re-evicting a clean block that the SLLC still holds writes nothing.
    const auto writes = h.stats().cores[0].sllc_writes;
    h.handle_access(rd_ev(0, 3));
    CHECK(h.stats().cores[0].sllc_writes == writes);
    CHECK(h.stats().cores[0].sllc_insertions == 2);
}

TEST_CASE("a peer supply sets the reuse bit on both copies") {
    Hierarchy h(tiny(2, Policy::ReuseDetector));
    h.handle_access(rd_ev(0, 7));
    CHECK(h.handle_access(rd_ev(1, 7)).served_from == ServedFrom::PeerCache);
    CHECK(private_line(h.l1(0), BlockAddr{7})->reuse);
    CHECK(private_line(h.l1(1), BlockAddr{7})->reuse);
    CHECK(h.stats().cores[1].peer_supplies == 1);
    CHECK(h.directory(BlockAddr{7})->sharers == 0b11);
}

TEST_CASE("a write invalidates peers and takes ownership") {
    Hierarchy h(tiny(3, Policy::Baseline));
    h.handle_access(rd_ev(0, 5));
    h.handle_access(rd_ev(1, 5));
    h.handle_access(rd_ev(2, 5));
    h.handle_access(wr_ev(1, 5));
    CHECK_FALSE(h.l1(0).find(BlockAddr{5}));
    CHECK_FALSE(h.l1(2).find(BlockAddr{5}));
    CHECK(private_line(h.l1(1), BlockAddr{5})->dirty);
    const auto d = h.directory(BlockAddr{5});
    REQUIRE(d);
    CHECK(d->sharers == 0b010);
    CHECK(d->dirty_owner == 1U);
    CHECK(h.stats().cores[1].coherence_invalidations == 2);
    CHECK(h.audit().empty());
}

TEST_CASE("a dirty peer supply leaves the supplier owning the dirty copy") {
    Hierarchy h(tiny(2, Policy::Baseline));
    h.handle_access(wr_ev(0, 9));
    h.handle_access(rd_ev(1, 9));
    CHECK(private_line(h.l1(0), BlockAddr{9})->dirty);
    CHECK_FALSE(private_line(h.l1(1), BlockAddr{9})->dirty);
    CHECK(h.directory(BlockAddr{9})->dirty_owner == 0U);
    CHECK(h.audit().empty());
}

TEST_CASE("a dirty bypass writes memory and drops the stale SLLC copy") {
    Hierarchy h(tiny(1, Policy::ReuseDetector));
    const EvictOutcome first = h.handle_l2_eviction(0, EvictedBlock{BlockAddr{4}, false, true, kPc});
    CHECK(first.action == EvictAction::InsertSLLC);
    REQUIRE(sllc_line(h, BlockAddr{4}));
    const EvictOutcome second = h.handle_l2_eviction(0, EvictedBlock{BlockAddr{4}, true, false, kPc});
    CHECK(second.action == EvictAction::BypassToMM);
    CHECK(second.rd_filled);
    CHECK_FALSE(sllc_line(h, BlockAddr{4}));
    CHECK(h.stats().cores[0].mm_writes == 1);
    CHECK(h.stats().sllc.stale_invalidations == 1);
    CHECK(h.stats().cores[0].sllc_writes == 1);
}

TEST_CASE("a second reuse-less eviction hits the RD and is admitted") {
    Hierarchy h(tiny(1, Policy::ReuseDetector));
    const EvictOutcome a = h.handle_l2_eviction(0, EvictedBlock{BlockAddr{3}, true, false, kPc});
    CHECK(a.action == EvictAction::BypassToMM);
    CHECK(a.rd_filled);
    const EvictOutcome b = h.handle_l2_eviction(0, EvictedBlock{BlockAddr{3}, false, false, kPc});
    CHECK(b.rd_hit);
    CHECK(b.action == EvictAction::InsertSLLC);
    // A reused block never consults the RD.
    const EvictOutcome c = h.handle_l2_eviction(0, EvictedBlock{BlockAddr{8}, false, true, kPc});
    CHECK_FALSE(c.rd_hit);
    CHECK_FALSE(c.rd_filled);
    CHECK(c.action == EvictAction::InsertSLLC);
}

TEST_CASE("latency of the first access walks every level") {
    Hierarchy h(testing::small_config(1, Policy::Baseline));
    const AccessOutcome o = h.handle_access(rd_ev(0, 1));
    // L1 2 + L2 5 + network 3 + SLLC tag read 6 + memory 200
    CHECK(o.latency_cycles == 216);
    CHECK(h.stats().cores[0].cycles == 217);
    h.handle_access(rd_ev(0, 1));
    CHECK(h.stats().cores[0].cycles == 217 + 1 + 2);
}

TEST_CASE("a cold RD bypasses an entire stream") {
    GeneratorSpec s;
    s.kind = GeneratorKind::Stream;
    s.n = 3000;
    s.write_ratio = 0.5;
    const Trace t = gen_synthetic(s, 5);
    std::uint64_t written = 0;
    for (const auto& ev : t) {
        written += ev.kind == AccessKind::Write ? 1 : 0;
    }
    Hierarchy h(testing::small_config(1, Policy::ReuseDetector));
    const SimStats st = h.run(t);
    const CoreStats& c = st.cores[0];
    CHECK(c.sllc_insertions == 0);
    CHECK(c.sllc_writes == 0);
    CHECK(c.private_evictions > 0);
    CHECK(c.bypasses == c.private_evictions);
    CHECK(c.rd_fills == c.private_evictions);
    // Every written block is either still dirty in L2 or was written back once.
    std::uint64_t resident_dirty = 0;
    const PrivateCache& l2 = *h.l2(0);
    for (std::uint64_t set = 0; set < l2.sets(); ++set) {
        for (std::uint32_t w = 0; w < l2.ways(); ++w) {
            const BlockAddr b = l2.block_at(set, w);
            if (l2.line(set, w).valid && held_dirty_privately(h, b)) {
                ++resident_dirty;
            }
        }
    }
    CHECK(c.mm_writes + resident_dirty == written);

    Hierarchy base(testing::small_config(1, Policy::Baseline));
    const CoreStats& b = base.run(t).cores[0];
    CHECK(b.sllc_insertions == b.private_evictions);
    CHECK(b.sllc_hits == 0);
}

TEST_CASE("directory and inclusion stay consistent after every access") {
    Rng rng(61);
    for (int round = 0; round < 90; ++round) {
        const Trace t = testing::random_mixed_trace(rng, 1500);
        for (const HierarchyConfig& cfg : config_variants(rng, cores_in(t))) {
            Hierarchy h(cfg);
            for (std::size_t i = 0; i < t.size(); ++i) {
                h.handle_access(t[i]);
                const auto problems = h.audit();
                if (!problems.empty()) {
                    FAIL("round " << round << " " << to_string(cfg.policy) << " access " << i << ": "
                                  << problems.front());
                }
            }
        }
    }
}

TEST_CASE("no dirty value is ever lost") {
    Rng rng(67);
    for (int round = 0; round < 60; ++round) {
        const Trace t = testing::random_mixed_trace(rng, 1200);
        for (const HierarchyConfig& cfg : config_variants(rng, cores_in(t))) {
            Hierarchy h(cfg);
            DirtyTracker tracker(h);
            h.set_observer(&tracker);
            for (const auto& ev : t) {
                h.handle_access(ev);
                tracker.after_access(ev);
                if (!tracker.problems.empty()) {
                    break;
                }
            }
            if (!tracker.problems.empty()) {
                FAIL("round " << round << " " << to_string(cfg.policy) << ": " << tracker.problems.front());
            }
        }
    }
}

TEST_CASE("counter identities hold on random traces") {
    Rng rng(71);
    for (int round = 0; round < 80; ++round) {
        const Trace t = testing::random_mixed_trace(rng, 3000);
        for (const HierarchyConfig& cfg : config_variants(rng, cores_in(t))) {
            Hierarchy h(cfg);
            const SimStats s = h.run(t);
            const CoreStats c = s.total();
            REQUIRE(c.accesses == t.size());
            REQUIRE(c.reads + c.writes == c.accesses);
            REQUIRE(c.sllc_hits + c.sllc_misses == c.accesses - c.l1_hits - c.l2_hits);
            REQUIRE(c.sllc_misses == c.peer_supplies + c.mm_reads);
            REQUIRE(c.sllc_writes == c.sllc_insertions + c.sllc_updates);
            REQUIRE(c.sllc_write_occupancy_cycles == 17 * c.sllc_writes);
            if (cfg.policy == Policy::Baseline) {
                REQUIRE(c.bypasses == 0);
            }
            if (cfg.policy == Policy::ReuseDetector) {
                REQUIRE(c.bypasses == c.rd_fills);
            }
            std::uint64_t resident = 0;
            for (std::uint64_t set = 0; set < h.sllc().sets(); ++set) {
                for (std::uint32_t w = 0; w < h.sllc().ways(); ++w) {
                    resident += h.sllc().line(set, w).valid ? 1 : 0;
                }
            }
            REQUIRE(c.sllc_insertions == s.sllc.evictions + s.sllc.stale_invalidations + resident);
        }
    }
}

TEST_CASE("runs are deterministic") {
    Rng rng(73);
    for (int round = 0; round < 20; ++round) {
        const Trace t = testing::random_mixed_trace(rng, 4000);
        for (const HierarchyConfig& cfg : config_variants(rng, cores_in(t))) {
            Hierarchy a(cfg);
            Hierarchy b(cfg);
            REQUIRE(a.run(t) == b.run(t));
            REQUIRE(a.snapshot() == b.snapshot());
        }
    }
}

TEST_CASE("RD never writes more than baseline on random traces") {
    Rng rng(79);
    for (int round = 0; round < 100; ++round) {
        const Trace t = testing::random_mixed_trace(rng, 3000);
        const std::uint32_t cores = cores_in(t);
        Hierarchy base(testing::small_config(cores, Policy::Baseline));
        Hierarchy rd(testing::small_config(cores, Policy::ReuseDetector));
        REQUIRE(rd.run(t).total().sllc_writes <= base.run(t).total().sllc_writes);
    }
}

TEST_CASE("an empty trace leaves every counter at zero") {
    Hierarchy h(testing::small_config(2, Policy::ReuseDetector));
    const SimStats s = h.run(Trace{});
    CHECK(s == SimStats(2));
    CHECK(h.directory_size() == 0);
}

TEST_CASE("out-of-range cores are rejected") {
    Hierarchy h(testing::small_config(2, Policy::Baseline));
    CHECK_THROWS_AS(h.handle_access(rd_ev(2, 1)), ContractViolation);
    CHECK_THROWS_AS((void)h.handle_l2_eviction(5, EvictedBlock{}), ContractViolation);
    const Trace bad{rd_ev(0, 1), rd_ev(3, 1)};
    CHECK_THROWS_AS((void)h.run(bad), ConfigError);
}

TEST_CASE("configuration validation") {
    HierarchyConfig cfg = testing::small_config(2, Policy::ReuseDetector);
    cfg.rd.reset();
    CHECK_THROWS_AS(Hierarchy{cfg}, ConfigError);
    cfg = testing::small_config(2, Policy::Baseline);
    cfg.sllc_banks = 0;
    CHECK_THROWS_AS(Hierarchy{cfg}, ConfigError);
    cfg = testing::small_config(0, Policy::Baseline);
    CHECK_THROWS_AS(Hierarchy{cfg}, ConfigError);
    cfg = testing::small_config(1, Policy::Baseline);
    cfg.l2->geometry.block_bytes = 128;
    CHECK_THROWS_AS(Hierarchy{cfg}, ConfigError);
    CHECK(parse_policy("reuse-detector") == Policy::ReuseDetector);
    CHECK_THROWS_AS((void)parse_policy("lru"), ConfigError);
}

TEST_CASE("default configuration sizes") {
    const HierarchyConfig cfg = HierarchyConfig::standard(4, Policy::ReuseDetector);
    CHECK(cfg.l1.geometry.capacity_bytes() == 32 * 1024);
    CHECK(cfg.l2->geometry.capacity_bytes() == 256 * 1024);
    CHECK(cfg.sllc.geometry.capacity_bytes() == 4 * 1024 * 1024);
    CHECK(cfg.sllc_banks == 4);
    CHECK(cfg.rd->entries() == 8192);
    CHECK(storage_bits(*cfg.rd) == 114688);
}
