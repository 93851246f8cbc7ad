#include "rdsim/cache.hpp"

#include <string>

namespace rdsim {

void CacheConfig::validate() const {
    geometry.validate();
    if (read_latency_cycles < 1 || write_latency_cycles < 1) {
        throw ConfigError("cache latencies must be >= 1 cycle");
    }
}

template <CacheRole Role>
SetAssocCache<Role>::SetAssocCache(const CacheConfig& cfg)
    : cfg_(cfg), lines_(cfg.geometry.sets * cfg.geometry.ways), set_fill_(cfg.geometry.sets, 0) {
    cfg_.validate();
    if (cfg_.role != Role) {
        throw ConfigError("cache configured with the wrong inclusion role");
    }
}

template <CacheRole Role>
std::optional<std::uint32_t> SetAssocCache<Role>::lookup(std::uint64_t set, std::uint64_t tag) const {
    if (set >= sets()) {
        throw ContractViolation("lookup: set " + std::to_string(set) + " out of range");
    }
    const CacheLine* row = &lines_[set * ways()];
    for (std::uint32_t w = 0; w < ways(); ++w) {
        if (row[w].valid && row[w].tag == tag) {
            return w;
        }
    }
    return std::nullopt;
}

template <CacheRole Role>
std::optional<CacheLine> SetAssocCache<Role>::insert(std::uint64_t set, CacheLine line) {
    if (!line.valid) {
        throw ContractViolation("insert: line must be valid");
    }
    if (lookup(set, line.tag)) {
        throw ContractViolation("insert: tag " + std::to_string(line.tag) + " already present in set " +
                                std::to_string(set));
    }
    if constexpr (Role == CacheRole::SharedNonInclusive) {
        line.reuse = false;
    }
    std::optional<CacheLine> evicted;
    std::uint32_t target = 0;
    if (set_fill_[set] == ways()) {
        for (std::uint32_t w = 0; w < ways(); ++w) {
            if (at(set, w).lru_rank == ways() - 1) {
                target = w;
                break;
            }
        }
        evicted = at(set, target);
        at(set, target).valid = false;
        --set_fill_[set];
        --valid_;
    } else {
        while (at(set, target).valid) {
            ++target;
        }
    }
    for (std::uint32_t w = 0; w < ways(); ++w) {
        if (at(set, w).valid) {
            ++at(set, w).lru_rank;
        }
    }
    line.lru_rank = 0;
    at(set, target) = line;
    ++set_fill_[set];
    ++valid_;
    return evicted;
}

template <CacheRole Role>
CacheLine& SetAssocCache<Role>::checked(std::uint64_t set, std::uint32_t way, const char* op) {
    if (set >= sets() || way >= ways() || !at(set, way).valid) {
        throw ContractViolation(std::string(op) + ": no valid line at set " + std::to_string(set) + " way " +
                                std::to_string(way));
    }
    return at(set, way);
}

template <CacheRole Role>
void SetAssocCache<Role>::touch(std::uint64_t set, std::uint32_t way) {
    const std::uint32_t rank = checked(set, way, "touch").lru_rank;
    for (std::uint32_t w = 0; w < ways(); ++w) {
        CacheLine& l = at(set, w);
        if (l.valid && l.lru_rank < rank) {
            ++l.lru_rank;
        }
    }
    at(set, way).lru_rank = 0;
}

template <CacheRole Role>
void SetAssocCache<Role>::mark_dirty(std::uint64_t set, std::uint32_t way) {
    checked(set, way, "mark_dirty").dirty = true;
}

template <CacheRole Role>
void SetAssocCache<Role>::set_reuse(std::uint64_t set, std::uint32_t way, bool value)
    requires(Role == CacheRole::PrivateInclusive)
{
    checked(set, way, "set_reuse").reuse = value;
}

template <CacheRole Role>
void SetAssocCache<Role>::set_pc(std::uint64_t set, std::uint32_t way, Addr pc) {
    checked(set, way, "set_pc").pc = pc;
}

template <CacheRole Role>
CacheLine SetAssocCache<Role>::invalidate(std::uint64_t set, std::uint32_t way) {
    CacheLine out = checked(set, way, "invalidate");
    for (std::uint32_t w = 0; w < ways(); ++w) {
        CacheLine& l = at(set, w);
        if (l.valid && l.lru_rank > out.lru_rank) {
            --l.lru_rank;
        }
    }
    at(set, way).valid = false;
    --set_fill_[set];
    --valid_;
    return out;
}

template <CacheRole Role>
const CacheLine& SetAssocCache<Role>::line(std::uint64_t set, std::uint32_t way) const {
    if (set >= sets() || way >= ways()) {
        throw ContractViolation("line: set/way out of range");
    }
    return lines_[set * ways() + way];
}

template <CacheRole Role>
nlohmann::json SetAssocCache<Role>::snapshot() const {
    nlohmann::json out = nlohmann::json::array();
    for (std::uint64_t s = 0; s < sets(); ++s) {
        if (set_fill_[s] == 0) {
            continue;
        }
        nlohmann::json lines = nlohmann::json::array();
        for (std::uint32_t w = 0; w < ways(); ++w) {
            const CacheLine& l = lines_[s * ways() + w];
            if (!l.valid) {
                continue;
            }
            lines.push_back({{"way", w}, {"tag", l.tag}, {"dirty", l.dirty}, {"reuse", l.reuse}, {"lru", l.lru_rank}});
        }
        out.push_back({{"set", s}, {"lines", std::move(lines)}});
    }
    return out;
}

template class SetAssocCache<CacheRole::PrivateInclusive>;
template class SetAssocCache<CacheRole::SharedNonInclusive>;

} // namespace rdsim
