#include "rdsim/stats.hpp"

#include <algorithm>

#include "rdsim/errors.hpp"

namespace rdsim {

CoreStats& CoreStats::operator+=(const CoreStats& o) {
#define RDSIM_ADD(name) name += o.name;
    RDSIM_CORE_COUNTERS(RDSIM_ADD)
#undef RDSIM_ADD
    return *this;
}

SllcResidencyStats& SllcResidencyStats::operator+=(const SllcResidencyStats& o) {
    evictions += o.evictions;
    unreused_evictions += o.unreused_evictions;
    stale_invalidations += o.stale_invalidations;
    unreused_invalidations += o.unreused_invalidations;
    resident_unreused += o.resident_unreused;
    return *this;
}

CoreStats SimStats::total() const {
    CoreStats t;
    for (const auto& c : cores) {
        t += c;
    }
    return t;
}

std::uint64_t SimStats::elapsed_cycles() const {
    std::uint64_t m = 0;
    for (const auto& c : cores) {
        m = std::max(m, c.cycles);
    }
    return m;
}

SimStats& SimStats::operator+=(const SimStats& o) {
    if (cores.size() != o.cores.size()) {
        throw ContractViolation("cannot add stats with different core counts");
    }
    for (std::size_t i = 0; i < cores.size(); ++i) {
        cores[i] += o.cores[i];
    }
    sllc += o.sllc;
    return *this;
}

void to_json(nlohmann::json& j, const CoreStats& s) {
    j = nlohmann::json::object();
#define RDSIM_JSON(name) j[#name] = s.name;
    RDSIM_CORE_COUNTERS(RDSIM_JSON)
#undef RDSIM_JSON
}

void to_json(nlohmann::json& j, const SllcResidencyStats& s) {
    j = {{"evictions", s.evictions},
         {"unreused_evictions", s.unreused_evictions},
         {"stale_invalidations", s.stale_invalidations},
         {"unreused_invalidations", s.unreused_invalidations},
         {"resident_unreused", s.resident_unreused},
         {"unreused_insertions", s.unreused_insertions()}};
}

void to_json(nlohmann::json& j, const SimStats& s) {
    j = {{"cores", s.cores}, {"total", s.total()}, {"sllc", s.sllc}, {"elapsed_cycles", s.elapsed_cycles()}};
}

} // namespace rdsim
