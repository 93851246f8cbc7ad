#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdsim/hierarchy.hpp"

namespace rdsim {

// Two cores with direct-mapped single-frame L1s, no L2, a 4-way single-set
// SLLC and per-core 2-way single-set exact-tag RDs. Blocks A..E are block
// numbers 0xA..0xE, so every block maps to the same frame and set.
[[nodiscard]] HierarchyConfig golden_config(const DebugFaults& faults = {});

// The eight-access worked example.
[[nodiscard]] Trace golden_trace();

// One rendered state panel, component name -> contents. Components:
//   "L1_0", "L1_1"  lines as X(d,r)
//   "RD_0", "RD_1"  ways in physical order, "-" when invalid
//   "SLLC"          ways in physical order as X(d), "-" when invalid
//   "MM_writes"     main-memory write-back count
using GoldenPanel = std::map<std::string, std::string>;

[[nodiscard]] std::vector<GoldenPanel> golden_expected();
[[nodiscard]] GoldenPanel render_panel(const Hierarchy& h);

struct GoldenDivergence {
    std::size_t access = 0; // 1-based
    std::string component;
    std::string expected;
    std::string actual;
};

struct GoldenResult {
    std::size_t matched = 0;
    std::size_t total = 0;
    std::optional<GoldenDivergence> divergence;

    [[nodiscard]] bool passed() const { return !divergence && matched == total; }
};

// Replays the example and compares the state after every access, stopping at
// the first mismatch.
[[nodiscard]] GoldenResult run_golden(const DebugFaults& faults = {});

void to_json(nlohmann::json& j, const GoldenResult& r);

} // namespace rdsim
