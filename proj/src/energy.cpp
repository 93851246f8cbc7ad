#include "rdsim/energy.hpp"

#include <algorithm>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr double kNano = 1e-9;
constexpr double kMilli = 1e-3;

} // namespace

void EnergyParams::validate() const {
    if (hit_energy_nJ < 0 || write_energy_nJ < 0 || miss_energy_nJ < 0 || leakage_mW_per_bank < 0) {
        throw ConfigError("energy parameters must be non-negative");
    }
    if (!(clock_GHz > 0)) {
        throw ConfigError("clock frequency must be positive");
    }
}

EnergyParams EnergyParams::stt_ram(std::uint32_t banks) {
    return EnergyParams{0.32, 1.31, 0.32, 3.09, 2.0, banks};
}

EnergyParams EnergyParams::sram(std::uint32_t banks) {
    return EnergyParams{0.56, 0.56, 0.56, 190.58, 2.0, banks};
}

LlcCounts llc_counts(const SimStats& stats) {
    const CoreStats t = stats.total();
    return LlcCounts{t.sllc_hits, t.sllc_writes, t.sllc_misses};
}

double dynamic_energy(const LlcCounts& c, const EnergyParams& p) {
    return (static_cast<double>(c.hits) * p.hit_energy_nJ + static_cast<double>(c.writes) * p.write_energy_nJ +
            static_cast<double>(c.misses) * p.miss_energy_nJ) *
           kNano;
}

double dynamic_energy(const SimStats& stats, const EnergyParams& p) {
    return dynamic_energy(llc_counts(stats), p);
}

double static_energy(std::uint64_t elapsed_cycles, const EnergyParams& p) {
    if (!(p.clock_GHz > 0)) {
        throw ConfigError("clock frequency must be positive");
    }
    const double seconds = static_cast<double>(elapsed_cycles) / (p.clock_GHz * 1e9);
    return p.leakage_mW_per_bank * kMilli * static_cast<double>(p.banks) * seconds;
}

void TimingParams::validate() const {
    if (l1_cycles < 1 || l2_cycles < 1 || sllc_read_cycles < 1 || sllc_write_cycles < 1 || network_cycles < 1 ||
        mm_cycles < 1 || cycles_per_instruction < 1) {
        throw ConfigError("timing parameters must be >= 1 cycle");
    }
}

BankTimer::BankTimer(std::uint32_t banks, const TimingParams& t)
    : busy_until_(banks, 0), read_cycles_(t.sllc_read_cycles), write_cycles_(t.sllc_write_cycles) {
    if (banks == 0) {
        throw ConfigError("SLLC needs at least one bank");
    }
}

BankAccess BankTimer::account(BankOp op, std::uint32_t bank, std::uint64_t now) {
    if (bank >= busy_until_.size()) {
        throw ContractViolation("bank " + std::to_string(bank) + " out of range");
    }
    const std::uint64_t start = std::max(now, busy_until_[bank]);
    const std::uint64_t service = op == BankOp::Read ? read_cycles_ : write_cycles_;
    busy_until_[bank] = start + service;
    return BankAccess{start - now + service, start - now};
}

MetricsReport derive_metrics(const SimStats& stats, const EnergyParams& energy, const SimStats* baseline,
                             const std::vector<double>* alone_ipc) {
    const CoreStats t = stats.total();
    if (stats.elapsed_cycles() == 0) {
        throw MetricsError("cannot derive metrics from a run with zero cycles");
    }
    if (t.instructions == 0) {
        throw MetricsError("cannot derive per-kilo-instruction metrics from zero instructions");
    }
    MetricsReport m;
    for (const auto& c : stats.cores) {
        m.ipc.push_back(c.cycles == 0 ? 0.0 : static_cast<double>(c.instructions) / static_cast<double>(c.cycles));
    }
    for (double ipc : m.ipc) {
        m.it += ipc;
    }
    if (alone_ipc != nullptr) {
        if (alone_ipc->size() != m.ipc.size()) {
            throw MetricsError("weighted speedup needs one alone-run IPC per core");
        }
        double ws = 0.0;
        for (std::size_t i = 0; i < m.ipc.size(); ++i) {
            if (!((*alone_ipc)[i] > 0)) {
                throw MetricsError("alone-run IPC must be positive");
            }
            ws += m.ipc[i] / (*alone_ipc)[i];
        }
        m.ws = ws;
    }
    const double kilo_instr = static_cast<double>(t.instructions) / 1000.0;
    m.hits_pki = static_cast<double>(t.sllc_hits) / kilo_instr;
    m.wpki = static_cast<double>(t.sllc_writes) / kilo_instr;
    m.misses_pki = static_cast<double>(t.sllc_misses) / kilo_instr;
    m.writes = t.sllc_writes;
    m.e_dyn_J = dynamic_energy(stats, energy);
    m.e_stat_J = static_energy(stats.elapsed_cycles(), energy);
    m.e_total_J = m.e_dyn_J + m.e_stat_J;
    m.stalls = t.sllc_bank_stall_cycles;
    if (baseline != nullptr) {
        const CoreStats b = baseline->total();
        if (b.sllc_writes > 0) {
            m.writes_norm = static_cast<double>(t.sllc_writes) / static_cast<double>(b.sllc_writes);
        }
        if (b.sllc_hits > 0) {
            m.hits_norm = static_cast<double>(t.sllc_hits) / static_cast<double>(b.sllc_hits);
        }
        const double be = dynamic_energy(*baseline, energy) + static_energy(baseline->elapsed_cycles(), energy);
        if (be > 0) {
            m.e_total_norm = m.e_total_J / be;
        }
    }
    return m;
}

void to_json(nlohmann::json& j, const MetricsReport& m) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j = {{"trace_ipc", m.ipc},        {"it", m.it},
         {"ws", opt(m.ws)},           {"hits_pki", m.hits_pki},
         {"wpki", m.wpki},            {"misses_pki", m.misses_pki},
         {"writes", m.writes},        {"e_dyn_J", m.e_dyn_J},
         {"e_stat_J", m.e_stat_J},    {"e_total_J", m.e_total_J},
         {"stalls", m.stalls},        {"writes_norm", opt(m.writes_norm)},
         {"hits_norm", opt(m.hits_norm)}, {"e_total_norm", opt(m.e_total_norm)}};
}

} // namespace rdsim
