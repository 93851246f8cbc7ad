#include "rdsim/workload.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "rdsim/errors.hpp"
#include "rdsim/rng.hpp"

namespace rdsim {

std::string to_string(WpkiClass c) {
    switch (c) {
    case WpkiClass::High:
        return "High";
    case WpkiClass::Medium:
        return "Medium";
    case WpkiClass::Low:
        return "Low";
    }
    return "?";
}

char class_letter(WpkiClass c) { return to_string(c)[0]; }

WpkiClass parse_class(char letter) {
    switch (std::toupper(static_cast<unsigned char>(letter))) {
    case 'H':
        return WpkiClass::High;
    case 'M':
        return WpkiClass::Medium;
    case 'L':
        return WpkiClass::Low;
    default:
        throw ConfigError(std::string("unknown WPKI class '") + letter + "' (expected H, M or L)");
    }
}

WpkiClass classify(double wpki) {
    if (wpki >= 8.0) {
        return WpkiClass::High;
    }
    if (wpki >= 1.0) {
        return WpkiClass::Medium;
    }
    return WpkiClass::Low;
}

double measure_wpki(std::span<const AccessEvent> trace, HierarchyConfig cfg) {
    cfg.cores = 1;
    cfg.policy = Policy::Baseline;
    cfg.sllc_banks = 1;
    Trace alone(trace.begin(), trace.end());
    for (auto& ev : alone) {
        ev.core = 0;
    }
    Hierarchy h(cfg);
    const CoreStats t = h.run(alone).total();
    if (t.instructions == 0) {
        throw MetricsError("cannot compute WPKI: trace commits no instructions");
    }
    return 1000.0 * static_cast<double>(t.sllc_writes) / static_cast<double>(t.instructions);
}

std::uint32_t MixSpec::cores() const {
    std::uint32_t n = 0;
    for (const auto& [cls, count] : slots) {
        n += count;
    }
    return n;
}

std::string MixSpec::letters() const {
    std::string s;
    for (const auto& [cls, count] : slots) {
        s += class_letter(cls);
    }
    return s;
}

MixSpec MixSpec::parse(const std::string& text) {
    MixSpec spec;
    spec.pattern = text;
    std::size_t i = 0;
    std::vector<WpkiClass> classes;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        classes.push_back(parse_class(text[i]));
        ++i;
    }
    if (classes.empty()) {
        throw ConfigError("mix pattern '" + text + "' has no class letters");
    }
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            if (classes[a] == classes[b]) {
                throw ConfigError("mix pattern '" + text + "' repeats a class letter");
            }
        }
    }
    std::vector<std::uint32_t> counts;
    auto read_count = [&](std::size_t& pos) {
        const std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (pos == start || pos - start > 6) {
            throw ConfigError("mix pattern '" + text + "' has a malformed count");
        }
        return static_cast<std::uint32_t>(std::stoul(text.substr(start, pos - start)));
    };
    if (i < text.size() && text[i] == '(') {
        ++i;
        for (;;) {
            counts.push_back(read_count(i));
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
            if (i < text.size() && text[i] == ')') {
                ++i;
                break;
            }
            throw ConfigError("mix pattern '" + text + "' has an unterminated count list");
        }
    } else if (i < text.size()) {
        counts.push_back(read_count(i));
    }
    if (i != text.size()) {
        throw ConfigError("mix pattern '" + text + "' has trailing characters");
    }
    if (counts.size() != classes.size()) {
        throw ConfigError("mix pattern '" + text + "' needs one count per class letter");
    }
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (counts[k] == 0) {
            throw ConfigError("mix pattern '" + text + "' has a zero count");
        }
        spec.slots.emplace_back(classes[k], counts[k]);
    }
    return spec;
}

std::vector<Mix> build_mixes(const std::vector<Workload>& pool, const std::vector<MixSpec>& patterns,
                             std::uint64_t seed) {
    std::map<WpkiClass, std::vector<const Workload*>> by_class;
    for (const auto& w : pool) {
        by_class[w.cls].push_back(&w);
    }
    for (auto& [cls, members] : by_class) {
        std::sort(members.begin(), members.end(),
                  [](const Workload* a, const Workload* b) { return a->name < b->name; });
    }

    std::string shortfall;
    for (const auto& spec : patterns) {
        for (const auto& [cls, count] : spec.slots) {
            const std::size_t have = by_class[cls].size();
            if (have < count) {
                if (!shortfall.empty()) {
                    shortfall += "; ";
                }
                shortfall += spec.pattern + " needs " + std::to_string(count) + " " + to_string(cls) +
                             " workloads, pool has " + std::to_string(have);
            }
        }
    }
    if (!shortfall.empty()) {
        throw ConfigError("insufficient workload pool: " + shortfall);
    }

    Rng rng(seed);
    std::map<std::string, std::uint32_t> numbering;
    std::vector<Mix> mixes;
    for (const auto& spec : patterns) {
        Mix mix;
        mix.pattern = spec.pattern;
        mix.seed = seed;
        for (const auto& [cls, count] : spec.slots) {
            std::vector<const Workload*> cand = by_class[cls];
            // Partial Fisher-Yates: the first `count` slots end up as the draw.
            for (std::uint32_t k = 0; k < count; ++k) {
                const std::size_t j = k + uniform_below(rng, cand.size() - k);
                std::swap(cand[k], cand[j]);
                mix.members.push_back(*cand[k]);
            }
        }
        std::stable_sort(mix.members.begin(), mix.members.end(), [](const Workload& a, const Workload& b) {
            if (a.cls != b.cls) {
                return a.cls > b.cls;
            }
            return a.name < b.name;
        });
        const std::string letters = spec.letters();
        mix.name = "mix." + letters + std::to_string(numbering[letters]++);
        mixes.push_back(std::move(mix));
    }
    return mixes;
}

Trace interleave(const std::vector<Trace>& per_core) {
    const std::size_t n = per_core.size();
    std::vector<std::size_t> pos(n, 0);
    std::vector<std::uint64_t> committed(n, 0);
    std::size_t total = 0;
    for (const auto& t : per_core) {
        total += t.size();
    }
    Trace out;
    out.reserve(total);
    while (out.size() < total) {
        std::size_t pick = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (pos[c] < per_core[c].size() && (pick == n || committed[c] < committed[pick])) {
                pick = c;
            }
        }
        AccessEvent ev = per_core[pick][pos[pick]++];
        ev.core = static_cast<std::uint32_t>(pick);
        committed[pick] += ev.icount_delta;
        out.push_back(ev);
    }
    return out;
}

void to_json(nlohmann::json& j, const Workload& w) {
    j = {{"name", w.name}, {"trace", w.trace.generic_string()}, {"wpki", w.wpki}, {"class", to_string(w.cls)}};
}

void from_json(const nlohmann::json& j, Workload& w) {
    w.name = j.at("name").get<std::string>();
    w.trace = j.at("trace").get<std::string>();
    w.wpki = j.value("wpki", 0.0);
    if (j.contains("class")) {
        const auto s = j.at("class").get<std::string>();
        if (s.empty()) {
            throw ConfigError("workload '" + w.name + "' has an empty class");
        }
        w.cls = parse_class(s[0]);
    } else {
        w.cls = classify(w.wpki);
    }
}

void to_json(nlohmann::json& j, const Mix& m) {
    j = {{"name", m.name}, {"pattern", m.pattern}, {"seed", m.seed}, {"members", m.members}};
}

void from_json(const nlohmann::json& j, Mix& m) {
    m.name = j.at("name").get<std::string>();
    m.pattern = j.value("pattern", std::string{});
    m.seed = j.value("seed", std::uint64_t{0});
    m.members = j.at("members").get<std::vector<Workload>>();
}

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void resolve(std::vector<Workload>& ws, const std::filesystem::path& manifest) {
    for (auto& w : ws) {
        if (w.trace.is_relative()) {
            w.trace = manifest.parent_path() / w.trace;
        }
    }
}

} // namespace

std::vector<Workload> load_pool(const std::filesystem::path& path) {
    const auto j = read_json(path);
    try {
        auto ws = j.at("workloads").get<std::vector<Workload>>();
        resolve(ws, path);
        return ws;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_pool(const std::filesystem::path& path, const std::vector<Workload>& pool) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << nlohmann::json{{"workloads", pool}}.dump(2) << '\n';
}

Mix load_mix(const std::filesystem::path& path) {
    const auto j = read_json(path);
    try {
        auto m = j.get<Mix>();
        resolve(m.members, path);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace rdsim
