#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rdsim/hierarchy.hpp"
#include "rdsim/trace.hpp"

namespace rdsim {

enum class WpkiClass { Low, Medium, High };

[[nodiscard]] std::string to_string(WpkiClass c);
[[nodiscard]] char class_letter(WpkiClass c);
[[nodiscard]] WpkiClass parse_class(char letter);

// High above 8, Medium between 1 and 8, Low below 1. The boundary values
// themselves go to the upper class.
[[nodiscard]] WpkiClass classify(double wpki);

// Runs the trace alone on core 0 of `cfg` under the baseline policy and
// returns SLLC writes per 1000 instructions. Throws MetricsError when the
// trace commits no instructions.
[[nodiscard]] double measure_wpki(std::span<const AccessEvent> trace, HierarchyConfig cfg);

struct Workload {
    std::string name;
    std::filesystem::path trace;
    double wpki = 0.0;
    WpkiClass cls = WpkiClass::Low;
};

// "H4", "HL(2,2)", "HML(1,1,2)": class letters followed by per-class counts.
// A single letter may carry its count directly ("H4"); several letters need the
// parenthesised list.
struct MixSpec {
    std::string pattern;
    std::vector<std::pair<WpkiClass, std::uint32_t>> slots;

    [[nodiscard]] std::uint32_t cores() const;
    [[nodiscard]] std::string letters() const;

    [[nodiscard]] static MixSpec parse(const std::string& text);
};

struct Mix {
    std::string name;
    std::string pattern;
    std::uint64_t seed = 0;
    std::vector<Workload> members; // core i runs members[i]
};

// For each pattern, draws the required number of workloads per class from the
// pool without replacement (seeded). Members are ordered by decreasing class,
// then alphabetically; mixes sharing a letter pattern are numbered in the order
// given ("HL0", "HL1", ...). Throws ConfigError naming every class shortfall.
[[nodiscard]] std::vector<Mix> build_mixes(const std::vector<Workload>& pool, const std::vector<MixSpec>& patterns,
                                           std::uint64_t seed);

// Merges single-workload traces into one multi-core trace, workload i on core
// i. The next event always comes from the core with the fewest committed
// instructions so far (lowest index on ties).
[[nodiscard]] Trace interleave(const std::vector<Trace>& per_core);

void to_json(nlohmann::json& j, const Workload& w);
void from_json(const nlohmann::json& j, Workload& w);
void to_json(nlohmann::json& j, const Mix& m);
void from_json(const nlohmann::json& j, Mix& m);

// Pool manifest: {"workloads": [Workload, ...]}. Relative trace paths are
// resolved against the manifest's directory on load.
[[nodiscard]] std::vector<Workload> load_pool(const std::filesystem::path& path);
void save_pool(const std::filesystem::path& path, const std::vector<Workload>& pool);
[[nodiscard]] Mix load_mix(const std::filesystem::path& path);

} // namespace rdsim
