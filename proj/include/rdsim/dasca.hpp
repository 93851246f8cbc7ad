#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "rdsim/address.hpp"

namespace rdsim {

// DASCA-lite: a PC-signature dead-write predictor. Signature hash, sampler
// geometry, training rule and counter initialisation are local choices; the
// original update table is not reproduced here.
struct DascaConfig {
    unsigned sig_bits = 16;
    std::uint8_t threshold = 2;  // predict dead when counter >= threshold; 4 never fires
    std::uint64_t sampler_sets = 32;
    std::uint64_t sampler_ways = 16;

    void validate() const;
};

struct Signature {
    std::uint32_t value = 0;

    friend bool operator==(const Signature&, const Signature&) = default;
};

[[nodiscard]] Signature make_signature(Addr pc, unsigned sig_bits);

// Table of 2-bit saturating counters indexed by signature. Counters start at
// 0, so a cold table never predicts a dead write.
class PredictorTable {
public:
    PredictorTable(unsigned sig_bits, std::uint8_t threshold);

    [[nodiscard]] bool predict_dead(Signature sig) const { return counters_[sig.value] >= threshold_; }
    void train_dead(Signature sig);
    void train_live(Signature sig);

    [[nodiscard]] std::uint8_t counter(Signature sig) const { return counters_[sig.value]; }
    [[nodiscard]] std::size_t size() const { return counters_.size(); }
    // Number of counters holding each value 0..3.
    [[nodiscard]] std::vector<std::uint64_t> histogram() const;

private:
    std::vector<std::uint8_t> counters_;
    std::uint8_t threshold_;
};

// Shadow tag store for a subset of SLLC sets. It sees every write that
// would reach a sampled set (including writes the policy later bypasses) and
// every demand read to it, and trains the table:
//   entry evicted with no read since its last write -> train_dead
//   read hits an entry                                -> train_live
class DascaSampler {
public:
    DascaSampler(const DascaConfig& cfg, std::uint64_t sllc_sets);

    [[nodiscard]] bool samples(std::uint64_t sllc_set) const;

    void on_write(std::uint64_t sllc_set, BlockAddr block, Signature sig, PredictorTable& table);
    void on_read(std::uint64_t sllc_set, BlockAddr block, PredictorTable& table);

    [[nodiscard]] std::uint64_t sets() const { return sets_; }
    [[nodiscard]] std::uint64_t ways() const { return ways_; }

private:
    struct Entry {
        BlockAddr block{};
        Signature sig{};
        bool valid = false;
        bool read_since_write = false;
        std::uint64_t stamp = 0;
    };

    Entry* row(std::uint64_t sllc_set) { return &entries_[(sllc_set / stride_) * ways_]; }

    std::uint64_t sets_;
    std::uint64_t ways_;
    std::uint64_t stride_;
    std::vector<Entry> entries_;
    std::uint64_t clock_ = 0;
};

class DascaPredictor {
public:
    DascaPredictor(const DascaConfig& cfg, std::uint64_t sllc_sets);

    [[nodiscard]] const DascaConfig& config() const { return cfg_; }
    [[nodiscard]] Signature signature(Addr pc) const { return make_signature(pc, cfg_.sig_bits); }
    [[nodiscard]] bool predict_dead(Signature sig) const { return table_.predict_dead(sig); }

    void observe_write(std::uint64_t sllc_set, BlockAddr block, Signature sig) {
        if (sampler_.samples(sllc_set)) {
            sampler_.on_write(sllc_set, block, sig, table_);
        }
    }
    void observe_read(std::uint64_t sllc_set, BlockAddr block) {
        if (sampler_.samples(sllc_set)) {
            sampler_.on_read(sllc_set, block, table_);
        }
    }

    [[nodiscard]] const PredictorTable& table() const { return table_; }
    PredictorTable& table() { return table_; }
    [[nodiscard]] nlohmann::json dump() const;

private:
    DascaConfig cfg_;
    PredictorTable table_;
    DascaSampler sampler_;
};

} // namespace rdsim
