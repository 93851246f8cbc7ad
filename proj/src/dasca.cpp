#include "rdsim/dasca.hpp"

#include <algorithm>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

void DascaConfig::validate() const {
    if (sig_bits < 1 || sig_bits > 24) {
        throw ConfigError("DASCA signature width must be 1..24 bits");
    }
    if (threshold > 4) {
        throw ConfigError("DASCA threshold must be 0..4");
    }
    if (sampler_sets == 0 || sampler_ways == 0) {
        throw ConfigError("DASCA sampler needs at least one set and one way");
    }
}

Signature make_signature(Addr pc, unsigned sig_bits) {
    const std::uint64_t mask = (std::uint64_t{1} << sig_bits) - 1;
    return Signature{static_cast<std::uint32_t>((pc ^ (pc >> sig_bits)) & mask)};
}

PredictorTable::PredictorTable(unsigned sig_bits, std::uint8_t threshold)
    : counters_(std::size_t{1} << sig_bits, 0), threshold_(threshold) {}

void PredictorTable::train_dead(Signature sig) {
    auto& c = counters_[sig.value];
    if (c < 3) {
        ++c;
    }
}

void PredictorTable::train_live(Signature sig) {
    auto& c = counters_[sig.value];
    if (c > 0) {
        --c;
    }
}

std::vector<std::uint64_t> PredictorTable::histogram() const {
    std::vector<std::uint64_t> h(4, 0);
    for (auto c : counters_) {
        ++h[c];
    }
    return h;
}

DascaSampler::DascaSampler(const DascaConfig& cfg, std::uint64_t sllc_sets)
    : sets_(std::min(cfg.sampler_sets, sllc_sets)),
      ways_(cfg.sampler_ways),
      stride_(sllc_sets / std::min(cfg.sampler_sets, sllc_sets)),
      entries_(sets_ * ways_) {}

bool DascaSampler::samples(std::uint64_t sllc_set) const {
    return sllc_set % stride_ == 0 && sllc_set / stride_ < sets_;
}

void DascaSampler::on_write(std::uint64_t sllc_set, BlockAddr block, Signature sig, PredictorTable& table) {
    Entry* r = row(sllc_set);
    ++clock_;
    for (std::uint64_t w = 0; w < ways_; ++w) {
        if (r[w].valid && r[w].block == block) {
            r[w].sig = sig;
            r[w].read_since_write = false;
            r[w].stamp = clock_;
            return;
        }
    }
    std::uint64_t victim = 0;
    for (std::uint64_t w = 0; w < ways_; ++w) {
        if (!r[w].valid) {
            victim = w;
            break;
        }
        if (r[w].stamp < r[victim].stamp) {
            victim = w;
        }
    }
    if (r[victim].valid && !r[victim].read_since_write) {
        table.train_dead(r[victim].sig);
    }
    r[victim] = Entry{block, sig, true, false, clock_};
}

void DascaSampler::on_read(std::uint64_t sllc_set, BlockAddr block, PredictorTable& table) {
    Entry* r = row(sllc_set);
    for (std::uint64_t w = 0; w < ways_; ++w) {
        if (r[w].valid && r[w].block == block) {
            table.train_live(r[w].sig);
            r[w].read_since_write = true;
            r[w].stamp = ++clock_;
            return;
        }
    }
}

namespace {

const DascaConfig& validated(const DascaConfig& cfg) {
    cfg.validate();
    return cfg;
}

} // namespace

DascaPredictor::DascaPredictor(const DascaConfig& cfg, std::uint64_t sllc_sets)
    : cfg_(validated(cfg)), table_(cfg.sig_bits, cfg.threshold), sampler_(cfg, sllc_sets) {}

nlohmann::json DascaPredictor::dump() const {
    const auto h = table_.histogram();
    return {{"sig_bits", cfg_.sig_bits},
            {"threshold", cfg_.threshold},
            {"sampler_sets", sampler_.sets()},
            {"sampler_ways", sampler_.ways()},
            {"counter_histogram", h}};
}

} // namespace rdsim
