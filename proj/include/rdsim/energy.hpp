#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "rdsim/stats.hpp"

namespace rdsim {

// Per-access energies and leakage of one 1MB LLC bank at 22 nm.
// There is no published miss energy; it defaults to the read energy since a
// miss still performs the tag/data lookup.
struct EnergyParams {
    double hit_energy_nJ = 0.32;
    double write_energy_nJ = 1.31;
    double miss_energy_nJ = 0.32;
    double leakage_mW_per_bank = 3.09;
    double clock_GHz = 2.0;
    std::uint32_t banks = 1;

    void validate() const;

    [[nodiscard]] static EnergyParams stt_ram(std::uint32_t banks = 1);
    [[nodiscard]] static EnergyParams sram(std::uint32_t banks = 1);
};

struct LlcCounts {
    std::uint64_t hits = 0;
    std::uint64_t writes = 0;
    std::uint64_t misses = 0;
};

[[nodiscard]] LlcCounts llc_counts(const SimStats& stats);

// H*HE + W*WE + M*ME, in joules.
[[nodiscard]] double dynamic_energy(const LlcCounts& c, const EnergyParams& p);
[[nodiscard]] double dynamic_energy(const SimStats& stats, const EnergyParams& p);

// Leakage x banks x elapsed time, in joules.
[[nodiscard]] double static_energy(std::uint64_t elapsed_cycles, const EnergyParams& p);

struct TimingParams {
    std::uint32_t l1_cycles = 2;
    std::uint32_t l2_cycles = 5;
    std::uint32_t sllc_read_cycles = 6;
    std::uint32_t sllc_write_cycles = 17;
    std::uint32_t network_cycles = 3;
    std::uint32_t mm_cycles = 200;
    // Cycles charged per committed instruction on top of memory latency.
    std::uint32_t cycles_per_instruction = 1;

    void validate() const;
};

enum class BankOp { Read, Write };

struct BankAccess {
    std::uint64_t latency_cycles = 0; // stall + service time
    std::uint64_t stall_cycles = 0;
};

// Busy-until bookkeeping for the SLLC banks. An access that arrives while its
// bank is busy waits, then occupies the bank for its read or write latency.
class BankTimer {
public:
    BankTimer(std::uint32_t banks, const TimingParams& t);

    BankAccess account(BankOp op, std::uint32_t bank, std::uint64_t now);

    [[nodiscard]] std::uint32_t banks() const { return static_cast<std::uint32_t>(busy_until_.size()); }
    [[nodiscard]] std::uint64_t busy_until(std::uint32_t bank) const { return busy_until_.at(bank); }

private:
    std::vector<std::uint64_t> busy_until_;
    std::uint32_t read_cycles_;
    std::uint32_t write_cycles_;
};

// IPC figures here come from the additive latency model ("trace-IPC"), not
// from a pipeline model.
struct MetricsReport {
    std::vector<double> ipc;
    double it = 0.0;
    std::optional<double> ws;
    double hits_pki = 0.0;
    double wpki = 0.0;
    double misses_pki = 0.0;
    std::uint64_t writes = 0;
    double e_dyn_J = 0.0;
    double e_stat_J = 0.0;
    double e_total_J = 0.0;
    std::uint64_t stalls = 0;
    std::optional<double> writes_norm;
    std::optional<double> hits_norm;
    std::optional<double> e_total_norm;
};

// alone_ipc, when given, holds one IPC per core measured with that core's
// workload running alone; it enables weighted speedup. Throws MetricsError
// when the run has zero cycles or zero instructions.
[[nodiscard]] MetricsReport derive_metrics(const SimStats& stats, const EnergyParams& energy,
                                           const SimStats* baseline = nullptr,
                                           const std::vector<double>* alone_ipc = nullptr);

void to_json(nlohmann::json& j, const MetricsReport& m);

} // namespace rdsim
