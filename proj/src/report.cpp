#include "rdsim/report.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <thread>

#include "rdsim/errors.hpp"

namespace rdsim {

std::string SweepPoint::label() const {
    std::string s = to_string(policy);
    if (policy != Policy::ReuseDetector || (!rd_entries && !c_bits)) {
        return s;
    }
    if (rd_entries) {
        s += "-";
        s += *rd_entries % 1024 == 0 ? std::to_string(*rd_entries / 1024) + "K" : std::to_string(*rd_entries);
    }
    if (c_bits) {
        s += "-c" + std::to_string(*c_bits);
    }
    return s;
}

HierarchyConfig configure(const HierarchyConfig& base, const SweepPoint& point) {
    HierarchyConfig cfg = base;
    cfg.policy = point.policy;
    if (point.policy == Policy::ReuseDetector) {
        const RdConfig seed = base.rd ? *base.rd : RdConfig{};
        const std::uint64_t entries = point.rd_entries.value_or(seed.entries());
        const unsigned c = point.c_bits.value_or(seed.tag_cfg.c_bits);
        cfg.rd = RdConfig::make(entries, seed.rd_ways, cfg.l1.geometry.block_bytes, c, seed.tag_cfg.sector_blocks);
    }
    cfg.validate();
    return cfg;
}

namespace {

std::vector<double> alone_ipcs(const HierarchyConfig& cfg, const Trace& trace) {
    std::vector<Trace> split(cfg.cores);
    for (const auto& ev : trace) {
        AccessEvent e = ev;
        e.core = 0;
        split.at(ev.core).push_back(e);
    }
    HierarchyConfig alone = cfg;
    alone.cores = 1;
    alone.sllc_banks = 1;
    std::vector<double> out;
    for (const auto& t : split) {
        if (t.empty()) {
            out.push_back(0.0);
            continue;
        }
        Hierarchy h(alone);
        const CoreStats s = h.run(t).total();
        out.push_back(s.cycles == 0 ? 0.0 : static_cast<double>(s.instructions) / static_cast<double>(s.cycles));
    }
    return out;
}

struct Task {
    std::size_t input;
    std::optional<std::size_t> point; // none: the baseline reference run
};

} // namespace

std::vector<RunResult> run_sweep(const std::vector<SweepInput>& inputs, const std::vector<SweepPoint>& points,
                                 const SweepOptions& opts) {
    std::vector<HierarchyConfig> cfgs;
    for (const auto& p : points) {
        cfgs.push_back(configure(opts.base, p));
    }
    HierarchyConfig baseline_cfg = configure(opts.base, SweepPoint{});
    EnergyParams energy = opts.energy;
    energy.banks = opts.base.sllc_banks;
    energy.validate();

    std::vector<Task> tasks;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        validate_trace(inputs[i].trace, opts.base.cores);
        tasks.push_back({i, std::nullopt});
        for (std::size_t k = 0; k < points.size(); ++k) {
            tasks.push_back({i, k});
        }
    }

    struct Slot {
        SimStats stats;
        std::optional<std::vector<double>> alone;
        std::optional<nlohmann::json> snapshot;
        std::optional<nlohmann::json> predictor;
    };
    std::vector<Slot> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            try {
                const Task& task = tasks[t];
                const HierarchyConfig& cfg = task.point ? cfgs[*task.point] : baseline_cfg;
                const Trace& trace = inputs[task.input].trace;
                Hierarchy h(cfg);
                slots[t].stats = h.run(trace);
                if (task.point) {
                    if (opts.weighted_speedup) {
                        slots[t].alone = alone_ipcs(cfg, trace);
                    }
                    if (opts.snapshots) {
                        slots[t].snapshot = h.snapshot();
                    }
                    if (const DascaPredictor* d = h.dasca()) {
                        slots[t].predictor = d->dump();
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = tasks.size();
            }
        }
    };
    const unsigned jobs = std::max(1U, std::min<unsigned>(opts.jobs, static_cast<unsigned>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<RunResult> results;
    std::size_t base_slot = 0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& task = tasks[t];
        if (!task.point) {
            base_slot = t;
            continue;
        }
        std::vector<double> alone;
        const bool have_ws = slots[t].alone && std::all_of(slots[t].alone->begin(), slots[t].alone->end(),
                                                           [](double v) { return v > 0; });
        if (have_ws) {
            alone = *slots[t].alone;
        }
        RunResult r;
        r.label = points[*task.point].label();
        r.trace = inputs[task.input].name;
        r.config = cfgs[*task.point];
        r.stats = slots[t].stats;
        r.metrics = derive_metrics(r.stats, energy, &slots[base_slot].stats, have_ws ? &alone : nullptr);
        r.snapshot = std::move(slots[t].snapshot);
        r.predictor = std::move(slots[t].predictor);
        results.push_back(std::move(r));
    }
    return results;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json run_json(const RunResult& r) {
    nlohmann::json j = {{"policy", r.label},
                        {"trace", r.trace},
                        {"config", r.config},
                        {"stats", r.stats},
                        {"metrics", r.metrics}};
    if (r.config.rd) {
        j["rd_storage_bits"] = storage_bits(*r.config.rd);
        j["rd_storage_KB"] = static_cast<double>(storage_bits(*r.config.rd)) / 8.0 / 1024.0;
    }
    if (r.snapshot) {
        j["snapshot"] = *r.snapshot;
    }
    if (r.predictor) {
        j["predictor"] = *r.predictor;
    }
    return j;
}

std::string csv_row(const nlohmann::json& run) {
    try {
        const auto& m = run.at("metrics");
        auto num = [&](const char* key) {
            const auto& v = m.at(key);
            return v.is_null() ? std::string{} : format_double(v.get<double>());
        };
        auto count = [&](const char* key) { return std::to_string(m.at(key).get<std::uint64_t>()); };
        std::string row = run.at("policy").get<std::string>();
        row += "," + run.at("trace").get<std::string>();
        row += "," + count("writes");
        row += "," + num("writes_norm");
        row += "," + num("hits_pki");
        row += "," + num("it");
        row += "," + num("ws");
        row += "," + num("e_dyn_J");
        row += "," + num("e_stat_J");
        row += "," + num("e_total_norm");
        row += "," + count("stalls");
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed run record: ") + e.what());
    }
}

std::string csv_row(const RunResult& r) { return csv_row(run_json(r)); }

} // namespace rdsim
