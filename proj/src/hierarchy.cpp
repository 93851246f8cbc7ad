#include "rdsim/hierarchy.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

std::optional<std::uint32_t> lowest_core(std::uint64_t mask) {
    if (mask == 0) {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>(std::countr_zero(mask));
}

std::uint64_t bit(std::uint32_t core) { return std::uint64_t{1} << core; }

nlohmann::json cache_json(const CacheConfig& c) {
    return {{"block_bytes", c.geometry.block_bytes},
            {"sets", c.geometry.sets},
            {"ways", c.geometry.ways},
            {"capacity_bytes", c.geometry.capacity_bytes()},
            {"role", c.role == CacheRole::PrivateInclusive ? "private-inclusive" : "shared-non-inclusive"},
            {"read_latency_cycles", c.read_latency_cycles},
            {"write_latency_cycles", c.write_latency_cycles}};
}

} // namespace

std::string to_string(Policy p) {
    switch (p) {
    case Policy::Baseline:
        return "baseline";
    case Policy::ReuseDetector:
        return "rd";
    case Policy::DascaLite:
        return "dasca";
    }
    return "?";
}

Policy parse_policy(const std::string& s) {
    if (s == "baseline") {
        return Policy::Baseline;
    }
    if (s == "rd" || s == "reuse-detector") {
        return Policy::ReuseDetector;
    }
    if (s == "dasca" || s == "dasca-lite") {
        return Policy::DascaLite;
    }
    throw ConfigError("unknown policy '" + s + "' (expected baseline, rd or dasca)");
}

std::string to_string(ServedFrom s) {
    switch (s) {
    case ServedFrom::L1:
        return "L1";
    case ServedFrom::L2:
        return "L2";
    case ServedFrom::SLLC:
        return "SLLC";
    case ServedFrom::PeerCache:
        return "PeerCache";
    case ServedFrom::MainMemory:
        return "MainMemory";
    }
    return "?";
}

std::string to_string(EvictAction a) {
    switch (a) {
    case EvictAction::InsertSLLC:
        return "InsertSLLC";
    case EvictAction::UpdateSLLC:
        return "UpdateSLLC";
    case EvictAction::BypassToMM:
        return "BypassToMM";
    case EvictAction::Discard:
        return "Discard";
    }
    return "?";
}

void HierarchyConfig::validate() const {
    if (cores == 0 || cores > 64) {
        throw ConfigError("core count must be 1..64, got " + std::to_string(cores));
    }
    l1.validate();
    sllc.validate();
    if (l1.role != CacheRole::PrivateInclusive) {
        throw ConfigError("L1 must be a private cache");
    }
    if (sllc.role != CacheRole::SharedNonInclusive) {
        throw ConfigError("the last-level cache must be shared and non-inclusive");
    }
    if (l2) {
        l2->validate();
        if (l2->role != CacheRole::PrivateInclusive) {
            throw ConfigError("L2 must be a private cache");
        }
        if (l2->geometry.block_bytes != l1.geometry.block_bytes) {
            throw ConfigError("L1 and L2 block sizes differ");
        }
    }
    if (sllc.geometry.block_bytes != l1.geometry.block_bytes) {
        throw ConfigError("private and shared block sizes differ");
    }
    if (policy == Policy::ReuseDetector && !rd) {
        throw ConfigError("the reuse-detector policy needs an RD configuration");
    }
    if (rd) {
        rd->validate();
    }
    if (policy == Policy::DascaLite) {
        dasca.validate();
    }
    timing.validate();
    if (sllc_banks == 0) {
        throw ConfigError("SLLC needs at least one bank");
    }
}

HierarchyConfig HierarchyConfig::standard(std::uint32_t cores, Policy policy) {
    HierarchyConfig cfg;
    cfg.cores = cores;
    cfg.l1 = CacheConfig{Geometry::from_capacity(32 * 1024, 8), CacheRole::PrivateInclusive, 2, 2};
    cfg.l2 = CacheConfig{Geometry::from_capacity(256 * 1024, 16), CacheRole::PrivateInclusive, 5, 5};
    cfg.sllc = CacheConfig{Geometry::from_capacity(std::uint64_t{1024} * 1024 * cores, 16),
                           CacheRole::SharedNonInclusive, 6, 17};
    cfg.rd = RdConfig::make(8192, 16, 64, 10, 2);
    cfg.policy = policy;
    cfg.sllc_banks = cores;
    return cfg;
}

Hierarchy::Hierarchy(HierarchyConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      sllc_(cfg_.sllc),
      sllc_line_hits_(cfg_.sllc.geometry.sets * cfg_.sllc.geometry.ways, 0),
      banks_(cfg_.sllc_banks, cfg_.timing),
      stats_(cfg_.cores) {
    cores_.reserve(cfg_.cores);
    for (std::uint32_t c = 0; c < cfg_.cores; ++c) {
        CoreState cs{PrivateCache(cfg_.l1), std::nullopt, std::nullopt, 0};
        if (cfg_.l2) {
            cs.l2.emplace(*cfg_.l2);
        }
        if (cfg_.policy == Policy::ReuseDetector) {
            cs.rd.emplace(*cfg_.rd);
        }
        cores_.push_back(std::move(cs));
    }
    if (cfg_.policy == Policy::DascaLite) {
        dasca_.emplace(cfg_.dasca, cfg_.sllc.geometry.sets);
    }
}

AccessOutcome Hierarchy::handle_access(const AccessEvent& ev) {
    if (ev.core >= cfg_.cores) {
        throw ContractViolation("access from core " + std::to_string(ev.core) + " but only " +
                                std::to_string(cfg_.cores) + " cores exist");
    }
    const std::uint32_t core = ev.core;
    CoreState& cs = cores_[core];
    CoreStats& st = stats_.cores[core];
    const TimingParams& t = cfg_.timing;
    const Geometry& g1 = cs.l1.geometry();
    const BlockAddr b = block_of(ev.addr, g1);
    const bool is_write = ev.kind == AccessKind::Write;

    ++st.accesses;
    ++(is_write ? st.writes : st.reads);
    st.instructions += ev.icount_delta;
    cs.now += static_cast<std::uint64_t>(ev.icount_delta) * t.cycles_per_instruction;

    AccessOutcome out;
    std::uint64_t lat = t.l1_cycles;

    if (auto w1 = cs.l1.find(b)) {
        cs.l1.touch(set_of(b, g1), *w1);
        out.served_from = ServedFrom::L1;
        ++st.l1_hits;
    } else if (std::optional<std::uint32_t> w2; cs.l2 && (w2 = cs.l2->find(b))) {
        lat += t.l2_cycles;
        const std::uint64_t s2 = set_of(b, cs.l2->geometry());
        cs.l2->touch(s2, *w2);
        CacheLine copy = cs.l2->line(s2, *w2);
        copy.tag = tag_of(b, g1);
        copy.dirty = false;
        if (auto victim = cs.l1.insert(set_of(b, g1), copy)) {
            write_down_to_l2(cs, *victim, block_from(victim->tag, set_of(b, g1), g1));
        }
        out.served_from = ServedFrom::L2;
        ++st.l2_hits;
    } else {
        if (cs.l2) {
            lat += t.l2_cycles;
        }
        lat += t.network_cycles;
        const std::uint64_t sset = set_of(b, sllc_.geometry());
        const BankAccess lookup = banks_.account(BankOp::Read, bank_of(sset), cs.now + lat);
        lat += lookup.latency_cycles;
        st.sllc_bank_stall_cycles += lookup.stall_cycles;
        if (dasca_) {
            dasca_->observe_read(sset, b);
        }

        if (auto ws = sllc_.find(b)) {
            ++st.sllc_hits;
            sllc_.touch(sset, *ws);
            ++sllc_line_hits_[sset * sllc_.ways() + *ws];
            lat += t.network_cycles;
            fill_private(core, b, true, ev.pc, cs.now + lat);
            out.served_from = ServedFrom::SLLC;
        } else {
            ++st.sllc_misses;
            std::optional<std::uint32_t> supplier;
            if (auto it = directory_.find(b.value); it != directory_.end()) {
                supplier = lowest_core(it->second.sharers & ~bit(core));
            }
            if (supplier) {
                ++st.peer_supplies;
                set_reuse_everywhere(*supplier, b);
                const auto& peer = cores_[*supplier];
                lat += 2 * t.network_cycles + (peer.l2 ? t.l2_cycles : t.l1_cycles);
                fill_private(core, b, true, ev.pc, cs.now + lat);
                out.served_from = ServedFrom::PeerCache;
            } else {
                ++st.mm_reads;
                lat += t.mm_cycles;
                fill_private(core, b, cfg_.faults.reuse_on_mm_fill, ev.pc, cs.now + lat);
                out.served_from = ServedFrom::MainMemory;
            }
        }
    }

    if (is_write) {
        invalidate_peers(core, b);
        const auto w1 = cs.l1.find(b);
        if (!w1) {
            throw ContractViolation("written block missing from L1 after fill");
        }
        cs.l1.mark_dirty(set_of(b, g1), *w1);
        cs.l1.set_pc(set_of(b, g1), *w1, ev.pc);
        directory_.at(b.value).dirty_owner = core;
    }

    cs.now += lat;
    st.cycles = cs.now;
    out.latency_cycles = lat;
    return out;
}

void Hierarchy::fill_private(std::uint32_t core, BlockAddr b, bool reuse, Addr pc, std::uint64_t when) {
    CoreState& cs = cores_[core];
    evict_time_ = when;
    dir_add(core, b);

    if (cs.l2) {
        const Geometry& g2 = cs.l2->geometry();
        const std::uint64_t s2 = set_of(b, g2);
        if (auto victim = cs.l2->insert(s2, CacheLine{tag_of(b, g2), true, false, reuse, 0, pc})) {
            EvictedBlock eb{block_from(victim->tag, s2, g2), victim->dirty, victim->reuse, victim->pc};
            const Geometry& g1 = cs.l1.geometry();
            if (auto w1 = cs.l1.find(eb.block)) {
                const CacheLine inner = cs.l1.invalidate(set_of(eb.block, g1), *w1);
                if (inner.dirty) {
                    eb.dirty = true;
                    eb.pc = inner.pc;
                }
                eb.reuse = eb.reuse || inner.reuse;
            }
            handle_l2_eviction(core, eb);
        }
    }

    const Geometry& g1 = cs.l1.geometry();
    const std::uint64_t s1 = set_of(b, g1);
    if (auto victim = cs.l1.insert(s1, CacheLine{tag_of(b, g1), true, false, reuse, 0, pc})) {
        const BlockAddr vb = block_from(victim->tag, s1, g1);
        if (cs.l2) {
            write_down_to_l2(cs, *victim, vb);
        } else {
            handle_l2_eviction(core, EvictedBlock{vb, victim->dirty, victim->reuse, victim->pc});
        }
    }
}

void Hierarchy::write_down_to_l2(CoreState& cs, const CacheLine& l1_victim, BlockAddr b) {
    const Geometry& g2 = cs.l2->geometry();
    const std::uint64_t s2 = set_of(b, g2);
    const auto w2 = cs.l2->lookup(s2, tag_of(b, g2));
    if (!w2) {
        throw ContractViolation("L1 victim " + std::to_string(b.value) + " missing from inclusive L2");
    }
    if (l1_victim.dirty) {
        cs.l2->mark_dirty(s2, *w2);
        cs.l2->set_pc(s2, *w2, l1_victim.pc);
    }
    if (l1_victim.reuse) {
        cs.l2->set_reuse(s2, *w2, true);
    }
}

void Hierarchy::set_reuse_everywhere(std::uint32_t core, BlockAddr b) {
    CoreState& cs = cores_[core];
    if (auto w1 = cs.l1.find(b)) {
        cs.l1.set_reuse(set_of(b, cs.l1.geometry()), *w1, true);
    }
    if (cs.l2) {
        if (auto w2 = cs.l2->find(b)) {
            cs.l2->set_reuse(set_of(b, cs.l2->geometry()), *w2, true);
        }
    }
}

void Hierarchy::invalidate_peers(std::uint32_t writer, BlockAddr b) {
    auto it = directory_.find(b.value);
    if (it == directory_.end()) {
        return;
    }
    std::uint64_t others = it->second.sharers & ~bit(writer);
    while (auto peer = lowest_core(others)) {
        others &= ~bit(*peer);
        CoreState& ps = cores_[*peer];
        if (auto w1 = ps.l1.find(b)) {
            ps.l1.invalidate(set_of(b, ps.l1.geometry()), *w1);
        }
        if (ps.l2) {
            if (auto w2 = ps.l2->find(b)) {
                ps.l2->invalidate(set_of(b, ps.l2->geometry()), *w2);
            }
        }
        it->second.sharers &= ~bit(*peer);
        ++stats_.cores[writer].coherence_invalidations;
    }
}

EvictOutcome Hierarchy::handle_l2_eviction(std::uint32_t core, const EvictedBlock& victim) {
    if (core >= cfg_.cores) {
        throw ContractViolation("eviction from core " + std::to_string(core) + " out of range");
    }
    CoreState& cs = cores_[core];
    CoreStats& st = stats_.cores[core];
    ++st.private_evictions;
    dir_remove(core, victim.block);

    const Geometry& gs = sllc_.geometry();
    const std::uint64_t sset = set_of(victim.block, gs);
    const auto present = sllc_.find(victim.block);

    EvictOutcome out;
    bool admit = true;
    switch (cfg_.policy) {
    case Policy::Baseline:
        break;
    case Policy::ReuseDetector:
        if (!victim.reuse) {
            if (cs.rd->probe(victim.block)) {
                out.rd_hit = true;
                ++st.rd_hits;
                if (cfg_.faults.rd_erase_on_hit) {
                    cs.rd->erase(victim.block);
                }
            } else {
                cs.rd->insert(victim.block);
                out.rd_filled = true;
                ++st.rd_fills;
                admit = false;
            }
        }
        break;
    case Policy::DascaLite:
        if (!present || victim.dirty) {
            const Signature sig = dasca_->signature(victim.pc);
            admit = !dasca_->predict_dead(sig);
            dasca_->observe_write(sset, victim.block, sig);
        }
        break;
    }

    auto account_write = [&] {
        const BankAccess a = banks_.account(BankOp::Write, bank_of(sset), evict_time_);
        st.sllc_bank_stall_cycles += a.stall_cycles;
        st.sllc_write_occupancy_cycles += cfg_.timing.sllc_write_cycles;
        ++st.sllc_writes;
    };

    if (admit) {
        if (present) {
            if (victim.dirty) {
                sllc_.mark_dirty(sset, *present);
                if (cfg_.touch_on_update) {
                    sllc_.touch(sset, *present);
                }
                ++st.sllc_updates;
                account_write();
                out.action = EvictAction::UpdateSLLC;
            } else {
                out.action = EvictAction::Discard;
            }
        } else {
            auto evicted = sllc_.insert(sset, CacheLine{tag_of(victim.block, gs), true, victim.dirty, false, 0,
                                                        victim.pc});
            const std::uint32_t way = *sllc_.lookup(sset, tag_of(victim.block, gs));
            std::uint32_t& hits = sllc_line_hits_[sset * sllc_.ways() + way];
            if (evicted) {
                // The incoming line took the LRU victim's way.
                const BlockAddr gone = block_from(evicted->tag, sset, gs);
                if (evicted->dirty) {
                    mm_write(core, gone);
                }
                sllc_departure(gone, *evicted, hits, false);
            }
            hits = 0;
            ++st.sllc_insertions;
            account_write();
            out.action = EvictAction::InsertSLLC;
        }
    } else {
        out.bypassed = true;
        ++st.bypasses;
        if (victim.dirty) {
            mm_write(core, victim.block);
            if (present) {
                const CacheLine stale = sllc_.invalidate(sset, *present);
                sllc_departure(victim.block, stale, sllc_line_hits_[sset * sllc_.ways() + *present], true);
            }
            out.action = EvictAction::BypassToMM;
        } else {
            out.action = EvictAction::Discard;
        }
    }

    if (observer_ != nullptr) {
        observer_->on_private_eviction(core, victim, out);
    }
    return out;
}

void Hierarchy::sllc_departure(BlockAddr b, const CacheLine& line, std::uint32_t hits, bool invalidated) {
    if (invalidated) {
        ++stats_.sllc.stale_invalidations;
        if (hits == 0) {
            ++stats_.sllc.unreused_invalidations;
        }
    } else {
        ++stats_.sllc.evictions;
        if (hits == 0) {
            ++stats_.sllc.unreused_evictions;
        }
    }
    if (observer_ != nullptr) {
        observer_->on_sllc_departure(b, line.dirty, hits, invalidated);
    }
}

void Hierarchy::mm_write(std::uint32_t core, BlockAddr b) {
    ++stats_.cores[core].mm_writes;
    if (observer_ != nullptr) {
        observer_->on_mm_write(b);
    }
}

void Hierarchy::dir_add(std::uint32_t core, BlockAddr b) {
    directory_[b.value].sharers |= bit(core);
}

void Hierarchy::dir_remove(std::uint32_t core, BlockAddr b) {
    auto it = directory_.find(b.value);
    if (it == directory_.end()) {
        return;
    }
    it->second.sharers &= ~bit(core);
    if (it->second.dirty_owner == core) {
        it->second.dirty_owner.reset();
    }
    if (it->second.sharers == 0) {
        directory_.erase(it);
    }
}

std::optional<DirectoryEntry> Hierarchy::directory(BlockAddr b) const {
    if (auto it = directory_.find(b.value); it != directory_.end()) {
        return it->second;
    }
    return std::nullopt;
}

SimStats Hierarchy::run(std::span<const AccessEvent> trace) {
    validate_trace(trace, cfg_.cores);
    for (const auto& ev : trace) {
        handle_access(ev);
    }
    return final_stats();
}

SimStats Hierarchy::final_stats() const {
    SimStats out = stats_;
    for (std::uint64_t s = 0; s < sllc_.sets(); ++s) {
        for (std::uint32_t w = 0; w < sllc_.ways(); ++w) {
            if (sllc_.line(s, w).valid && sllc_line_hits_[s * sllc_.ways() + w] == 0) {
                ++out.sllc.resident_unreused;
            }
        }
    }
    return out;
}

bool Hierarchy::holds(std::uint32_t core, BlockAddr b) const {
    const CoreState& cs = cores_[core];
    return cs.l1.find(b).has_value() || (cs.l2 && cs.l2->find(b).has_value());
}

bool Hierarchy::holds_dirty(std::uint32_t core, BlockAddr b) const {
    const CoreState& cs = cores_[core];
    if (auto w1 = cs.l1.find(b); w1 && cs.l1.line(set_of(b, cs.l1.geometry()), *w1).dirty) {
        return true;
    }
    if (cs.l2) {
        if (auto w2 = cs.l2->find(b); w2 && cs.l2->line(set_of(b, cs.l2->geometry()), *w2).dirty) {
            return true;
        }
    }
    return false;
}

nlohmann::json Hierarchy::snapshot() const {
    nlohmann::json cores = nlohmann::json::array();
    for (std::uint32_t c = 0; c < cfg_.cores; ++c) {
        const CoreState& cs = cores_[c];
        cores.push_back({{"core", c},
                         {"l1", cs.l1.snapshot()},
                         {"l2", cs.l2 ? cs.l2->snapshot() : nlohmann::json(nullptr)},
                         {"rd", cs.rd ? cs.rd->snapshot() : nlohmann::json(nullptr)}});
    }
    std::vector<std::uint64_t> blocks;
    blocks.reserve(directory_.size());
    for (const auto& [blk, entry] : directory_) {
        blocks.push_back(blk);
    }
    std::sort(blocks.begin(), blocks.end());
    nlohmann::json dir = nlohmann::json::array();
    for (auto blk : blocks) {
        const DirectoryEntry& e = directory_.at(blk);
        std::vector<std::uint32_t> sharers;
        for (std::uint32_t c = 0; c < cfg_.cores; ++c) {
            if (e.sharers & bit(c)) {
                sharers.push_back(c);
            }
        }
        dir.push_back({{"block", blk},
                       {"sharers", sharers},
                       {"dirty_owner", e.dirty_owner ? nlohmann::json(*e.dirty_owner) : nlohmann::json(nullptr)}});
    }
    return {{"cores", std::move(cores)}, {"sllc", sllc_.snapshot()}, {"directory", std::move(dir)}};
}

std::vector<std::string> Hierarchy::audit() const {
    std::vector<std::string> problems;
    auto check_cache = [&](std::uint32_t c, const PrivateCache& cache, const char* level) {
        for (std::uint64_t s = 0; s < cache.sets(); ++s) {
            for (std::uint32_t w = 0; w < cache.ways(); ++w) {
                if (!cache.line(s, w).valid) {
                    continue;
                }
                const BlockAddr b = cache.block_at(s, w);
                auto it = directory_.find(b.value);
                if (it == directory_.end() || (it->second.sharers & bit(c)) == 0) {
                    problems.push_back(std::string(level) + " of core " + std::to_string(c) + " holds block " +
                                       std::to_string(b.value) + " unknown to the directory");
                }
                if (level[1] == '1' && cores_[c].l2 && !cores_[c].l2->find(b)) {
                    problems.push_back("inclusion broken: block " + std::to_string(b.value) + " in L1 of core " +
                                       std::to_string(c) + " but not in its L2");
                }
            }
        }
    };
    for (std::uint32_t c = 0; c < cfg_.cores; ++c) {
        check_cache(c, cores_[c].l1, "L1");
        if (cores_[c].l2) {
            check_cache(c, *cores_[c].l2, "L2");
        }
    }
    for (const auto& [blk, e] : directory_) {
        const BlockAddr b{blk};
        if (e.sharers == 0) {
            problems.push_back("directory entry for block " + std::to_string(blk) + " has no sharers");
        }
        for (std::uint32_t c = 0; c < cfg_.cores; ++c) {
            const bool listed = (e.sharers & bit(c)) != 0;
            if (listed && !holds(c, b)) {
                problems.push_back("directory lists core " + std::to_string(c) + " for block " +
                                   std::to_string(blk) + " but it holds no copy");
            }
            const bool owner = e.dirty_owner == c;
            if (owner && !(listed && holds_dirty(c, b))) {
                problems.push_back("dirty owner " + std::to_string(c) + " of block " + std::to_string(blk) +
                                   " holds no dirty copy");
            }
            if (!owner && listed && holds_dirty(c, b)) {
                problems.push_back("core " + std::to_string(c) + " holds block " + std::to_string(blk) +
                                   " dirty without owning it");
            }
        }
    }
    for (std::uint64_t s = 0; s < sllc_.sets(); ++s) {
        for (std::uint32_t w = 0; w < sllc_.ways(); ++w) {
            if (sllc_.line(s, w).valid && sllc_.line(s, w).reuse) {
                problems.push_back("SLLC line carries a reuse bit");
            }
        }
    }
    return problems;
}

void to_json(nlohmann::json& j, const HierarchyConfig& cfg) {
    j = {{"cores", cfg.cores},
         {"policy", to_string(cfg.policy)},
         {"l1", cache_json(cfg.l1)},
         {"l2", cfg.l2 ? cache_json(*cfg.l2) : nlohmann::json(nullptr)},
         {"sllc", cache_json(cfg.sllc)},
         {"sllc_banks", cfg.sllc_banks},
         {"touch_on_update", cfg.touch_on_update},
         {"timing",
          {{"l1_cycles", cfg.timing.l1_cycles},
           {"l2_cycles", cfg.timing.l2_cycles},
           {"sllc_read_cycles", cfg.timing.sllc_read_cycles},
           {"sllc_write_cycles", cfg.timing.sllc_write_cycles},
           {"network_cycles", cfg.timing.network_cycles},
           {"mm_cycles", cfg.timing.mm_cycles},
           {"cycles_per_instruction", cfg.timing.cycles_per_instruction}}}};
    if (cfg.rd) {
        j["rd"] = {{"sets", cfg.rd->rd_sets},
                   {"ways", cfg.rd->rd_ways},
                   {"entries", cfg.rd->entries()},
                   {"t_bits", cfg.rd->tag_cfg.t_bits},
                   {"c_bits", cfg.rd->tag_cfg.c_bits},
                   {"sector_blocks", cfg.rd->tag_cfg.sector_blocks},
                   {"storage_bits", storage_bits(*cfg.rd)}};
    } else {
        j["rd"] = nullptr;
    }
    if (cfg.policy == Policy::DascaLite) {
        j["dasca"] = {{"sig_bits", cfg.dasca.sig_bits},
                      {"threshold", cfg.dasca.threshold},
                      {"sampler_sets", cfg.dasca.sampler_sets},
                      {"sampler_ways", cfg.dasca.sampler_ways}};
    }
}

} // namespace rdsim
