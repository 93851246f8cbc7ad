#pragma once

#include <algorithm>
#include <cstdint>

#include "rdsim/hierarchy.hpp"
#include "rdsim/rng.hpp"
#include "rdsim/synthetic.hpp"

namespace rdsim::testing {

// Small hierarchy that a few thousand events push through every level:
// 4x2 L1, 8x4 L2, 64x8 SLLC, 64x16 RD.
inline HierarchyConfig small_config(std::uint32_t cores, Policy policy, bool with_l2 = true) {
    HierarchyConfig cfg;
    cfg.cores = cores;
    cfg.l1 = CacheConfig{Geometry{64, 4, 2}, CacheRole::PrivateInclusive, 2, 2};
    if (with_l2) {
        cfg.l2 = CacheConfig{Geometry{64, 8, 4}, CacheRole::PrivateInclusive, 5, 5};
    }
    cfg.sllc = CacheConfig{Geometry{64, 64, 8}, CacheRole::SharedNonInclusive, 6, 17};
    cfg.rd = RdConfig::make(1024, 16, 64, 10, 2);
    cfg.policy = policy;
    cfg.sllc_banks = cores;
    cfg.dasca.sampler_sets = 8;
    return cfg;
}

// Uniform accesses over a small footprint with a handful of PCs.
inline Trace random_walk(Rng& rng, std::uint32_t cores, std::size_t events, std::uint64_t footprint_blocks,
                         double write_ratio) {
    Trace t;
    t.reserve(events);
    for (std::size_t i = 0; i < events; ++i) {
        AccessEvent ev;
        ev.core = static_cast<std::uint32_t>(uniform_below(rng, cores));
        ev.pc = 0x1000 + 4 * uniform_below(rng, 8);
        ev.addr = uniform_below(rng, footprint_blocks) * 64 + 8 * uniform_below(rng, 8);
        ev.kind = bernoulli(rng, write_ratio) ? AccessKind::Write : AccessKind::Read;
        ev.icount_delta = 1 + static_cast<std::uint32_t>(uniform_below(rng, 6));
        t.push_back(ev);
    }
    return t;
}

// A randomly parameterised mixed-generator trace, optionally spliced with a
// random walk, capped at `max_events`.
inline Trace random_mixed_trace(Rng& rng, std::size_t max_events, std::uint32_t max_cores = 4) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Mixed;
    spec.cores = 1 + static_cast<std::uint32_t>(uniform_below(rng, max_cores));
    spec.p = uniform01(rng);
    spec.touches = 2 + uniform_below(rng, 3);
    spec.distance = 8 + uniform_below(rng, 400);
    spec.shared = bernoulli(rng, 0.3);
    spec.write_ratio = uniform01(rng) * 0.6;
    spec.ipa = 1 + static_cast<std::uint32_t>(uniform_below(rng, 8));
    const std::uint64_t per_block = 1 + static_cast<std::uint64_t>(spec.p * static_cast<double>(spec.touches));
    spec.n = std::max<std::uint64_t>(1, max_events / (per_block * spec.cores * 2));
    spec.n = 1 + uniform_below(rng, spec.n);
    Trace t = gen_synthetic(spec, rng());
    if (bernoulli(rng, 0.5)) {
        const std::size_t room = max_events > t.size() ? max_events - t.size() : 0;
        Trace walk = random_walk(rng, spec.cores, uniform_below(rng, room + 1), 16 + uniform_below(rng, 1024),
                                 uniform01(rng) * 0.5);
        // Interleave the walk at random positions.
        Trace merged;
        merged.reserve(t.size() + walk.size());
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < t.size() || j < walk.size()) {
            const bool take_walk = j < walk.size() && (i == t.size() || bernoulli(rng, 0.3));
            merged.push_back(take_walk ? walk[j++] : t[i++]);
        }
        t = std::move(merged);
    }
    if (t.size() > max_events) {
        t.resize(max_events);
    }
    // Every core's first event must commit at least one instruction.
    for (auto& ev : t) {
        ev.icount_delta = std::max<std::uint32_t>(ev.icount_delta, 1);
    }
    return t;
}

} // namespace rdsim::testing
