#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "rdsim/errors.hpp"
#include "rdsim/golden.hpp"
#include "rdsim/report.hpp"
#include "rdsim/synthetic.hpp"
#include "rdsim/workload.hpp"

namespace rdsim::cli {

namespace fs = std::filesystem;

namespace {

struct HierarchyOptions {
    std::uint32_t cores = 0; // 0: inferred from the inputs
    std::uint64_t block_bytes = 64;
    std::uint64_t l1_kb = 32;
    std::uint64_t l1_ways = 8;
    std::uint64_t l2_kb = 256; // 0: no L2
    std::uint64_t l2_ways = 16;
    std::uint64_t sllc_kb_per_core = 1024;
    std::uint64_t sllc_ways = 16;
    std::uint32_t banks = 0; // 0: one per core
    std::uint64_t rd_entries = 8192;
    std::uint64_t rd_ways = 16;
    unsigned c_bits = 10;
    std::uint64_t sector_blocks = 2;
    std::uint32_t mm_cycles = 200;
    bool touch_on_update = true;
    unsigned dasca_sig_bits = 16;
    unsigned dasca_threshold = 2;
    std::uint64_t dasca_sampler_sets = 32;
    std::string tech = "stt";
    std::optional<double> miss_energy_nJ;
    double clock_GHz = 2.0;
};

void add_hierarchy_options(CLI::App* cmd, HierarchyOptions& o) {
    cmd->add_option("--cores", o.cores, "Core count (0 infers it from the inputs)")->capture_default_str();
    cmd->add_option("--block-bytes", o.block_bytes, "Block size in bytes")->capture_default_str();
    cmd->add_option("--l1-kb", o.l1_kb, "L1 capacity per core (KB)")->capture_default_str();
    cmd->add_option("--l1-ways", o.l1_ways, "L1 associativity")->capture_default_str();
    cmd->add_option("--l2-kb", o.l2_kb, "L2 capacity per core (KB, 0 disables the L2)")->capture_default_str();
    cmd->add_option("--l2-ways", o.l2_ways, "L2 associativity")->capture_default_str();
    cmd->add_option("--sllc-kb-per-core", o.sllc_kb_per_core, "Shared LLC capacity per core (KB)")
        ->capture_default_str();
    cmd->add_option("--sllc-ways", o.sllc_ways, "Shared LLC associativity")->capture_default_str();
    cmd->add_option("--banks", o.banks, "Shared LLC banks (0: one per core)")->capture_default_str();
    cmd->add_option("--rd-ways", o.rd_ways, "Reuse Detector associativity")->capture_default_str();
    cmd->add_option("--sector-blocks", o.sector_blocks, "Blocks per RD sector")->capture_default_str();
    cmd->add_option("--mm-cycles", o.mm_cycles, "Main memory latency")->capture_default_str();
    cmd->add_option("--touch-on-update", o.touch_on_update, "Promote SLLC lines updated by a dirty eviction")
        ->capture_default_str();
    cmd->add_option("--dasca-sig-bits", o.dasca_sig_bits, "DASCA-lite signature width")->capture_default_str();
    cmd->add_option("--dasca-threshold", o.dasca_threshold, "DASCA-lite dead threshold (4 never bypasses)")
        ->capture_default_str();
    cmd->add_option("--dasca-sampler-sets", o.dasca_sampler_sets, "DASCA-lite sampled SLLC sets")
        ->capture_default_str();
    cmd->add_option("--tech", o.tech, "LLC technology for energy: stt or sram")
        ->check(CLI::IsMember({"stt", "sram"}))
        ->capture_default_str();
    cmd->add_option("--miss-energy-nj", o.miss_energy_nJ, "LLC miss energy (defaults to the read energy)");
    cmd->add_option("--clock-ghz", o.clock_GHz, "Clock frequency for static energy")->capture_default_str();
}

HierarchyConfig build_config(const HierarchyOptions& o, std::uint32_t cores) {
    HierarchyConfig cfg;
    cfg.cores = cores;
    cfg.l1 = CacheConfig{Geometry::from_capacity(o.l1_kb * 1024, o.l1_ways, o.block_bytes),
                         CacheRole::PrivateInclusive, 2, 2};
    if (o.l2_kb > 0) {
        cfg.l2 = CacheConfig{Geometry::from_capacity(o.l2_kb * 1024, o.l2_ways, o.block_bytes),
                             CacheRole::PrivateInclusive, 5, 5};
    }
    cfg.sllc = CacheConfig{Geometry::from_capacity(o.sllc_kb_per_core * 1024 * cores, o.sllc_ways, o.block_bytes),
                           CacheRole::SharedNonInclusive, 6, 17};
    cfg.rd = RdConfig::make(o.rd_entries, o.rd_ways, o.block_bytes, o.c_bits, o.sector_blocks);
    cfg.sllc_banks = o.banks == 0 ? cores : o.banks;
    cfg.timing.mm_cycles = o.mm_cycles;
    cfg.touch_on_update = o.touch_on_update;
    if (o.dasca_threshold > 255) {
        throw ConfigError("DASCA threshold out of range");
    }
    cfg.dasca.sig_bits = o.dasca_sig_bits;
    cfg.dasca.threshold = static_cast<std::uint8_t>(o.dasca_threshold);
    cfg.dasca.sampler_sets = o.dasca_sampler_sets;
    cfg.validate();
    return cfg;
}

EnergyParams build_energy(const HierarchyOptions& o) {
    EnergyParams p = o.tech == "sram" ? EnergyParams::sram() : EnergyParams::stt_ram();
    if (o.miss_energy_nJ) {
        p.miss_energy_nJ = *o.miss_energy_nJ;
    }
    p.clock_GHz = o.clock_GHz;
    p.validate();
    return p;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) {
        throw ConfigError("cannot write " + path.string());
    }
}

// Writes through a temporary so a failed run never leaves a partial file.
void write_file_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, text);
    fs::rename(tmp, path);
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& ch : out) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_')) {
            ch = '_';
        }
    }
    return out;
}

std::string storage_line(const std::string& label, const RdConfig& rd) {
    const std::uint64_t bits = storage_bits(rd);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: RD %llu entries x %u bits = %llu bits (%s KB per core)\n", label.c_str(),
                  static_cast<unsigned long long>(rd.entries()), rd.tag_cfg.c_bits +
                      static_cast<unsigned>(rd.tag_cfg.sector_blocks) + 2,
                  static_cast<unsigned long long>(bits), format_double(static_cast<double>(bits) / 8192.0).c_str());
    return buf;
}

std::string toml_value(const std::string& v) {
    std::string out = "\"";
    for (char ch : v) {
        if (ch == '"' || ch == '\\') {
            out += '\\';
        }
        out += ch;
    }
    return out + "\"";
}

// Effective settings of one subcommand as a loadable config section. Options
// that are unset and have no default are left out, as is the worker count so
// the echo does not depend on the machine.
std::string echo_config(const CLI::App& cmd) {
    std::string text = "[" + cmd.get_name() + "]\n";
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "jobs" || opt->get_lnames().empty()) {
            continue;
        }
        std::vector<std::string> vals;
        if (opt->count() > 0) {
            vals = opt->results();
        } else {
            std::string def = opt->get_default_str();
            if (def.empty()) {
                if (opt->get_type_size() == 0) {
                    text += name + "=false\n";
                }
                continue;
            }
            if (def.front() == '[' && def.back() == ']') {
                def = def.substr(1, def.size() - 2);
                std::stringstream ss(def);
                for (std::string item; std::getline(ss, item, ',');) {
                    vals.push_back(item);
                }
            } else {
                vals.push_back(def);
            }
        }
        if (opt->get_type_size() == 0) {
            text += name + "=" + (opt->as<bool>() ? "true" : "false") + "\n";
        } else if (opt->get_expected_max() > 1) {
            text += name + "=[";
            for (std::size_t i = 0; i < vals.size(); ++i) {
                text += (i ? "," : "") + toml_value(vals[i]);
            }
            text += "]\n";
        } else if (!vals.empty()) {
            text += name + "=" + toml_value(vals.back()) + "\n";
        }
    }
    return text;
}

struct SimulateArgs {
    HierarchyOptions h;
    std::vector<std::string> traces;
    std::vector<std::string> mixes;
    std::vector<std::string> policies{"baseline", "rd"};
    std::vector<std::uint64_t> rd_entries;
    std::vector<unsigned> c_bits;
    std::string out_dir;
    bool no_ws = false;
    bool snapshots = false;
    unsigned jobs = 1;
};

int cmd_simulate(const SimulateArgs& a, const std::string& effective, std::ostream& out) {
    std::vector<SweepInput> inputs;
    std::uint32_t cores = 0;
    for (const auto& t : a.traces) {
        if (t.empty()) {
            continue;
        }
        SweepInput in{sanitize(fs::path(t).stem().string()), load_trace(t)};
        cores = std::max(cores, cores_in(in.trace));
        inputs.push_back(std::move(in));
    }
    for (const auto& m : a.mixes) {
        if (m.empty()) {
            continue;
        }
        const Mix mix = load_mix(m);
        std::vector<Trace> per_core;
        for (const auto& w : mix.members) {
            per_core.push_back(load_trace(w.trace));
        }
        cores = std::max(cores, static_cast<std::uint32_t>(per_core.size()));
        inputs.push_back({sanitize(mix.name), interleave(per_core)});
    }
    if (inputs.empty()) {
        throw ConfigError("simulate needs at least one --trace or --mix");
    }
    if (a.h.cores != 0) {
        if (a.h.cores < cores) {
            throw ConfigError("inputs use " + std::to_string(cores) + " cores but --cores is " +
                              std::to_string(a.h.cores));
        }
        cores = a.h.cores;
    }

    std::vector<SweepPoint> points;
    for (const auto& name : a.policies) {
        const Policy p = parse_policy(name);
        if (p != Policy::ReuseDetector || (a.rd_entries.empty() && a.c_bits.empty())) {
            points.push_back(SweepPoint{p, std::nullopt, std::nullopt});
            continue;
        }
        std::vector<std::optional<std::uint64_t>> es(a.rd_entries.begin(), a.rd_entries.end());
        std::vector<std::optional<unsigned>> cs(a.c_bits.begin(), a.c_bits.end());
        if (es.empty()) {
            es.push_back(std::nullopt);
        }
        if (cs.empty()) {
            cs.push_back(std::nullopt);
        }
        for (auto e : es) {
            for (auto c : cs) {
                points.push_back(SweepPoint{p, e, c});
            }
        }
    }

    SweepOptions opts;
    opts.base = build_config(a.h, cores);
    opts.energy = build_energy(a.h);
    opts.weighted_speedup = !a.no_ws;
    opts.snapshots = a.snapshots;
    opts.jobs = a.jobs;
    // Validates every point before anything runs or is written.
    for (const auto& p : points) {
        (void)configure(opts.base, p);
    }

    const auto results = run_sweep(inputs, points, opts);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir / "runs");
    write_file(dir / "effective_config.toml", effective);
    std::string csv = std::string(kCsvHeader) + "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        char idx[16];
        std::snprintf(idx, sizeof idx, "%03zu", i);
        write_file(dir / "runs" / (std::string(idx) + "-" + r.trace + "-" + sanitize(r.label) + ".json"),
                   run_json(r).dump(2) + "\n");
        csv += csv_row(r) + "\n";
    }
    write_file_atomic(dir / "results.csv", csv);

    for (const auto& p : points) {
        if (p.policy == Policy::ReuseDetector) {
            out << storage_line(p.label(), *configure(opts.base, p).rd);
        }
    }
    out << csv;
    return kExitOk;
}

int cmd_golden(const std::string& fault, bool json, std::ostream& out) {
    DebugFaults faults;
    if (fault == "reuse-on-mm-fill") {
        faults.reuse_on_mm_fill = true;
    } else if (fault == "rd-erase-on-hit") {
        faults.rd_erase_on_hit = true;
    }
    const GoldenResult r = run_golden(faults);
    if (json) {
        out << nlohmann::json(r).dump(2) << "\n";
    } else if (r.passed()) {
        out << "golden: pass, " << r.matched << "/" << r.total << " states matched\n";
    } else {
        const auto& d = *r.divergence;
        out << "golden: FAIL at access " << d.access << " (" << r.matched << "/" << r.total << " states matched)\n"
            << "  component: " << d.component << "\n"
            << "  expected:  " << d.expected << "\n"
            << "  actual:    " << d.actual << "\n";
    }
    return r.passed() ? kExitOk : kExitFailure;
}

int cmd_gen_trace(const std::string& spec, std::uint64_t seed, const std::string& path, bool binary,
                  std::ostream& out) {
    const GeneratorSpec gs = GeneratorSpec::parse(spec);
    const Trace t = gen_synthetic(gs, seed);
    save_trace(path, t, binary);
    out << "wrote " << t.size() << " events (" << gs.to_string() << ", seed " << seed << ") to " << path << "\n";
    return kExitOk;
}

int cmd_wpki(const HierarchyOptions& h, const std::vector<std::string>& traces, const std::string& pool_out,
             std::ostream& out) {
    const HierarchyConfig cfg = build_config(h, 1);
    std::vector<Workload> pool;
    for (const auto& path : traces) {
        Workload w;
        w.name = fs::path(path).stem().string();
        w.trace = path;
        w.wpki = measure_wpki(load_trace(path), cfg);
        w.cls = classify(w.wpki);
        out << w.name << " " << format_double(w.wpki) << " " << to_string(w.cls) << "\n";
        pool.push_back(std::move(w));
    }
    if (!pool_out.empty()) {
        save_pool(pool_out, pool);
    }
    return kExitOk;
}

int cmd_mix(const std::string& pool_path, const std::vector<std::string>& patterns, std::uint64_t seed,
            const std::string& out_dir, std::ostream& out) {
    const auto pool = load_pool(pool_path);
    std::vector<MixSpec> specs;
    for (const auto& p : patterns) {
        specs.push_back(MixSpec::parse(p));
    }
    const auto mixes = build_mixes(pool, specs, seed);
    fs::create_directories(out_dir);
    for (const auto& m : mixes) {
        const fs::path path = fs::path(out_dir) / (m.name + ".json");
        write_file(path, nlohmann::json(m).dump(2) + "\n");
        out << m.name << ":";
        for (const auto& w : m.members) {
            out << " " << w.name << "(" << class_letter(w.cls) << ")";
        }
        out << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& runs_dir, const std::string& out_path, std::ostream& out) {
    if (!fs::is_directory(runs_dir)) {
        throw ConfigError("no such directory: " + runs_dir);
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(runs_dir)) {
        if (e.path().extension() == ".json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::string csv = std::string(kCsvHeader) + "\n";
    for (const auto& f : files) {
        std::ifstream in(f);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(f.string() + ": " + e.what());
        }
        csv += csv_row(j) + "\n";
    }
    if (out_path.empty()) {
        out << csv;
    } else {
        write_file_atomic(out_path, csv);
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trace-driven cache hierarchy simulator with Reuse Detector bypassing", "rdsim"};
    app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run every policy x trace combination and write reports");
    add_hierarchy_options(simulate, sim.h);
    simulate->add_option("--trace", sim.traces, "Trace file (text or binary); repeatable");
    simulate->add_option("--mix", sim.mixes, "Mix manifest; its member traces are interleaved; repeatable");
    simulate->add_option("--policy", sim.policies, "Policies to run: baseline, rd, dasca")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--rd-entries", sim.h.rd_entries, "RD entries per core")->capture_default_str();
    simulate->add_option("--rd-entries-sweep", sim.rd_entries, "RD sizes to sweep (comma separated)")
        ->delimiter(',');
    simulate->add_option("--c-bits", sim.h.c_bits, "Compressed RD tag width")->capture_default_str();
    simulate->add_option("--c-bits-sweep", sim.c_bits, "Compressed tag widths to sweep (comma separated)")
        ->delimiter(',');
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_flag("--no-ws", sim.no_ws, "Skip the alone runs needed for weighted speedup");
    simulate->add_flag("--snapshots", sim.snapshots, "Include final cache state in the per-run JSON");
    simulate->add_option("--jobs", sim.jobs, "Parallel workers")->envname("RDSIM_JOBS")->capture_default_str();

    std::string fault = "none";
    bool golden_json = false;
    auto* golden = app.add_subcommand("golden", "Replay the built-in Reuse Detector walk-through and diff states");
    golden->add_option("--fault", fault, "Inject a deliberate bug")
        ->check(CLI::IsMember({"none", "reuse-on-mm-fill", "rd-erase-on-hit"}))
        ->capture_default_str();
    golden->add_flag("--json", golden_json, "Print the result as JSON");

    std::string gen_spec;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    bool gen_binary = false;
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace");
    gen->add_option("--spec", gen_spec, "Generator spec, e.g. mixed:p=0.3,n=2000,cores=2")->required();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output trace path")->required();
    gen->add_flag("--binary", gen_binary, "Write the binary format");

    HierarchyOptions wpki_h;
    std::vector<std::string> wpki_traces;
    std::string wpki_pool;
    auto* wpki = app.add_subcommand("wpki", "Measure and classify LLC writes per kilo-instruction");
    add_hierarchy_options(wpki, wpki_h);
    wpki->add_option("--trace", wpki_traces, "Single-workload trace; repeatable")->required();
    wpki->add_option("--pool", wpki_pool, "Write a pool manifest here");

    std::string mix_pool;
    std::vector<std::string> mix_patterns;
    std::uint64_t mix_seed = 0;
    std::string mix_out;
    auto* mix = app.add_subcommand("mix", "Build multiprogrammed mixes from a classified pool");
    mix->add_option("--pool", mix_pool, "Pool manifest from `wpki --pool`")->required();
    mix->add_option("--pattern", mix_patterns, "Mix pattern such as H4 or HL(2,2); repeatable")->required();
    mix->add_option("--seed", mix_seed, "Random seed")->capture_default_str();
    mix->add_option("--out", mix_out, "Directory for mix manifests")->required();

    std::string report_runs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Rebuild the CSV from per-run JSON records");
    report->add_option("--runs", report_runs, "Directory of per-run JSON files")->required();
    report->add_option("--out", report_out, "CSV path (default: standard output)");

    std::vector<const char*> argv{"rdsim"};
    for (const auto& s : args) {
        argv.push_back(s.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim, echo_config(*simulate), out);
        }
        if (golden->parsed()) {
            return cmd_golden(fault, golden_json, out);
        }
        if (gen->parsed()) {
            return cmd_gen_trace(gen_spec, gen_seed, gen_out, gen_binary, out);
        }
        if (wpki->parsed()) {
            return cmd_wpki(wpki_h, wpki_traces, wpki_pool, out);
        }
        if (mix->parsed()) {
            return cmd_mix(mix_pool, mix_patterns, mix_seed, mix_out, out);
        }
        if (report->parsed()) {
            return cmd_report(report_runs, report_out, out);
        }
    } catch (const ConfigError& e) {
        err << "rdsim: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "rdsim: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "rdsim: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace rdsim::cli
