#include "rdsim/golden.hpp"

namespace rdsim {

namespace {

constexpr std::uint64_t kBlockBytes = 64;

std::string block_name(std::uint64_t block) {
    if (block >= 0xA && block <= 0xE) {
        return std::string(1, static_cast<char>('A' + (block - 0xA)));
    }
    return "#" + std::to_string(block);
}

std::string render_l1(const PrivateCache& c) {
    std::string out = "[";
    bool first = true;
    for (std::uint64_t s = 0; s < c.sets(); ++s) {
        for (std::uint32_t w = 0; w < c.ways(); ++w) {
            const CacheLine& l = c.line(s, w);
            if (!l.valid) {
                continue;
            }
            if (!first) {
                out += ",";
            }
            first = false;
            out += block_name(c.block_at(s, w).value) + "(" + (l.dirty ? "1" : "0") + "," + (l.reuse ? "1" : "0") +
                   ")";
        }
    }
    return out + "]";
}

std::string render_rd(const ReuseDetector& rd) {
    const RdConfig& cfg = rd.config();
    const unsigned set_bits = log2_exact(cfg.rd_sets);
    std::string out = "[";
    for (std::uint64_t s = 0; s < cfg.rd_sets; ++s) {
        for (std::uint32_t w = 0; w < cfg.rd_ways; ++w) {
            if (s != 0 || w != 0) {
                out += ",";
            }
            const RdEntry& e = rd.entry(s, w);
            if (!e.valid) {
                out += "-";
                continue;
            }
            const std::uint64_t sector = (e.ctag << set_bits) | s;
            std::string names;
            for (std::uint32_t slot = 0; slot < cfg.tag_cfg.sector_blocks; ++slot) {
                if ((e.presence >> slot) & 1U) {
                    names += block_name(sector * cfg.tag_cfg.sector_blocks + slot);
                }
            }
            out += names;
        }
    }
    return out + "]";
}

std::string render_sllc(const SharedCache& c) {
    std::string out = "[";
    for (std::uint64_t s = 0; s < c.sets(); ++s) {
        for (std::uint32_t w = 0; w < c.ways(); ++w) {
            if (s != 0 || w != 0) {
                out += ",";
            }
            const CacheLine& l = c.line(s, w);
            out += l.valid ? block_name(c.block_at(s, w).value) + "(" + (l.dirty ? "1" : "0") + ")" : "-";
        }
    }
    return out + "]";
}

} // namespace

HierarchyConfig golden_config(const DebugFaults& faults) {
    HierarchyConfig cfg;
    cfg.cores = 2;
    cfg.l1 = CacheConfig{Geometry{kBlockBytes, 1, 1}, CacheRole::PrivateInclusive, 2, 2};
    cfg.sllc = CacheConfig{Geometry{kBlockBytes, 1, 4}, CacheRole::SharedNonInclusive, 6, 17};
    cfg.rd = RdConfig::make_exact(2, 2, kBlockBytes, 1);
    cfg.policy = Policy::ReuseDetector;
    cfg.faults = faults;
    return cfg;
}

Trace golden_trace() {
    auto ev = [](std::uint32_t core, AccessKind kind, char block) {
        return AccessEvent{core, 0x400000, static_cast<Addr>(0xA + (block - 'A')) * kBlockBytes, kind, 1};
    };
    const auto R = AccessKind::Read;
    const auto W = AccessKind::Write;
    return {ev(0, R, 'A'), ev(1, R, 'A'), ev(1, R, 'B'), ev(1, R, 'C'),
            ev(1, R, 'B'), ev(1, R, 'D'), ev(0, W, 'A'), ev(0, R, 'E')};
}

std::vector<GoldenPanel> golden_expected() {
    auto panel = [](std::string l1_0, std::string l1_1, std::string rd_1, std::string sllc) {
        return GoldenPanel{{"L1_0", std::move(l1_0)}, {"L1_1", std::move(l1_1)}, {"RD_0", "[-,-]"},
                           {"RD_1", std::move(rd_1)}, {"SLLC", std::move(sllc)}, {"MM_writes", "0"}};
    };
    return {
        panel("[A(0,0)]", "[]", "[-,-]", "[-,-,-,-]"),
        panel("[A(0,1)]", "[A(0,1)]", "[-,-]", "[-,-,-,-]"),
        panel("[A(0,1)]", "[B(0,0)]", "[-,-]", "[A(0),-,-,-]"),
        panel("[A(0,1)]", "[C(0,0)]", "[B,-]", "[A(0),-,-,-]"),
        panel("[A(0,1)]", "[B(0,0)]", "[B,C]", "[A(0),-,-,-]"),
        panel("[A(0,1)]", "[D(0,0)]", "[B,C]", "[A(0),B(0),-,-]"),
        panel("[A(1,1)]", "[D(0,0)]", "[B,C]", "[A(0),B(0),-,-]"),
        panel("[E(0,0)]", "[D(0,0)]", "[B,C]", "[A(1),B(0),-,-]"),
    };
}

GoldenPanel render_panel(const Hierarchy& h) {
    GoldenPanel p;
    for (std::uint32_t c = 0; c < h.config().cores; ++c) {
        const std::string idx = std::to_string(c);
        p["L1_" + idx] = render_l1(h.l1(c));
        if (const ReuseDetector* rd = h.rd(c)) {
            p["RD_" + idx] = render_rd(*rd);
        }
    }
    p["SLLC"] = render_sllc(h.sllc());
    p["MM_writes"] = std::to_string(h.stats().total().mm_writes);
    return p;
}

GoldenResult run_golden(const DebugFaults& faults) {
    Hierarchy h(golden_config(faults));
    const Trace trace = golden_trace();
    const auto expected = golden_expected();
    GoldenResult r;
    r.total = expected.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        h.handle_access(trace[i]);
        const GoldenPanel actual = render_panel(h);
        for (const auto& [component, want] : expected[i]) {
            auto it = actual.find(component);
            const std::string got = it == actual.end() ? "<missing>" : it->second;
            if (got != want) {
                r.divergence = GoldenDivergence{i + 1, component, want, got};
                return r;
            }
        }
        ++r.matched;
    }
    return r;
}

void to_json(nlohmann::json& j, const GoldenResult& r) {
    j = {{"passed", r.passed()}, {"matched", r.matched}, {"total", r.total}};
    if (r.divergence) {
        j["divergence"] = {{"access", r.divergence->access},
                           {"component", r.divergence->component},
                           {"expected", r.divergence->expected},
                           {"actual", r.divergence->actual}};
    } else {
        j["divergence"] = nullptr;
    }
}

} // namespace rdsim
