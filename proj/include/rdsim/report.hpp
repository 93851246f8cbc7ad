#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdsim/energy.hpp"
#include "rdsim/hierarchy.hpp"

namespace rdsim {

// One policy variant of a sweep. rd_entries and c_bits only apply to the
// reuse-detector policy and fall back to the base configuration when unset.
struct SweepPoint {
    Policy policy = Policy::Baseline;
    std::optional<std::uint64_t> rd_entries;
    std::optional<unsigned> c_bits;

    // "baseline", "dasca", "rd" or "rd-16K-c10" style when RD parameters are set.
    [[nodiscard]] std::string label() const;
};

[[nodiscard]] HierarchyConfig configure(const HierarchyConfig& base, const SweepPoint& point);

struct SweepInput {
    std::string name;
    Trace trace;
};

struct SweepOptions {
    HierarchyConfig base;
    EnergyParams energy;
    // Run every core's stream alone to obtain weighted speedup.
    bool weighted_speedup = true;
    bool snapshots = false;
    unsigned jobs = 1;
};

struct RunResult {
    std::string label;
    std::string trace;
    HierarchyConfig config;
    SimStats stats;
    MetricsReport metrics;
    std::optional<nlohmann::json> snapshot;
    std::optional<nlohmann::json> predictor;
};

// Runs every (trace, point) pair; results come back trace-major in declared
// order whatever `jobs` is. Each trace is also run under the baseline policy to
// normalise writes, hits and energy.
[[nodiscard]] std::vector<RunResult> run_sweep(const std::vector<SweepInput>& inputs,
                                               const std::vector<SweepPoint>& points, const SweepOptions& opts);

// Fixed CSV schema.
inline constexpr const char* kCsvHeader =
    "policy,trace,writes,writes_norm,hits_pki,it,ws,e_dyn_J,e_stat_J,e_total_norm,stalls";

// Shortest round-trip decimal form, locale independent.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] nlohmann::json run_json(const RunResult& r);
// Builds the CSV row from a run's JSON record, so stored records can be
// re-reported. Throws ConfigError on a malformed record.
[[nodiscard]] std::string csv_row(const nlohmann::json& run);
[[nodiscard]] std::string csv_row(const RunResult& r);

} // namespace rdsim
