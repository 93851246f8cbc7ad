#include "rdsim/synthetic.hpp"

#include <charconv>
#include <functional>
#include <queue>
#include <sstream>
#include <string_view>
#include <tuple>
#include <vector>

#include "rdsim/errors.hpp"
#include "rdsim/rng.hpp"

namespace rdsim {

namespace {

constexpr unsigned kCoreRegionShift = 36;

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        v.remove_prefix(2);
        base = 16;
    }
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("generator parameter '" + std::string(key) + "' expects an integer, got '" +
                          std::string(v) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    // strtod is locale-sensitive, but "C" is the default for a fresh process.
    std::string s(v);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ConfigError("generator parameter '" + std::string(key) + "' expects a number, got '" + s + "'");
    }
    return out;
}

struct Emitter {
    const GeneratorSpec& spec;
    std::uint32_t core;
    Rng rng;
    Trace out;

    void emit(std::uint64_t block_index, Addr pc) {
        const Addr region = spec.shared ? 0 : (static_cast<Addr>(core) << kCoreRegionShift);
        const Addr block_base = spec.base + region + block_index * spec.stride * spec.block_bytes;
        const Addr offset = uniform_below(rng, spec.block_bytes / 8) * 8;
        AccessEvent ev;
        ev.core = core;
        ev.pc = pc;
        ev.addr = block_base + offset;
        ev.kind = bernoulli(rng, spec.write_ratio) ? AccessKind::Write : AccessKind::Read;
        ev.icount_delta = spec.ipa;
        out.push_back(ev);
    }
};

Trace generate_core(const GeneratorSpec& spec, std::uint64_t seed, std::uint32_t core) {
    Emitter e{spec, core, Rng(seed ^ (0x9E3779B97F4A7C15ULL * (core + 1))), {}};
    switch (spec.kind) {
    case GeneratorKind::Stream:
        for (std::uint64_t i = 0; i < spec.n; ++i) {
            e.emit(i, spec.pc);
        }
        break;
    case GeneratorKind::Loop:
        for (std::uint64_t pass = 0; pass < spec.passes; ++pass) {
            for (std::uint64_t i = 0; i < spec.ws; ++i) {
                e.emit(i, spec.pc);
            }
        }
        break;
    case GeneratorKind::Mixed: {
        // (due position, sequence, block, touches left)
        using Pending = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
        std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending;
        std::uint64_t fresh = 0;
        std::uint64_t seq = 0;
        std::uint64_t pos = 0;
        while (fresh < spec.n || !pending.empty()) {
            if (!pending.empty() && (std::get<0>(pending.top()) <= pos || fresh == spec.n)) {
                auto [due, s, block, left] = pending.top();
                pending.pop();
                e.emit(block, spec.pc + 4);
                if (left > 1) {
                    pending.emplace(pos + spec.distance, seq++, block, left - 1);
                }
            } else {
                const std::uint64_t block = fresh++;
                if (bernoulli(e.rng, spec.p)) {
                    e.emit(block, spec.pc + 4);
                    pending.emplace(pos + spec.distance, seq++, block, spec.touches - 1);
                } else {
                    e.emit(block, spec.pc);
                }
            }
            ++pos;
        }
        break;
    }
    }
    return std::move(e.out);
}

} // namespace

void GeneratorSpec::validate() const {
    switch (kind) {
    case GeneratorKind::Stream:
        if (n == 0) {
            throw ConfigError("stream: n must be >= 1");
        }
        break;
    case GeneratorKind::Loop:
        if (ws == 0) {
            throw ConfigError("loop: ws must be >= 1");
        }
        if (passes < 2) {
            throw ConfigError("loop: passes must be >= 2");
        }
        break;
    case GeneratorKind::Mixed:
        if (n == 0) {
            throw ConfigError("mixed: n must be >= 1");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("mixed: p must lie in [0, 1]");
        }
        if (distance == 0) {
            throw ConfigError("mixed: distance must be >= 1");
        }
        if (touches < 2) {
            throw ConfigError("mixed: touches must be >= 2");
        }
        break;
    }
    if (cores == 0) {
        throw ConfigError("generator: cores must be >= 1");
    }
    if (!(write_ratio >= 0.0 && write_ratio <= 1.0)) {
        throw ConfigError("generator: w must lie in [0, 1]");
    }
    if (ipa == 0) {
        throw ConfigError("generator: ipa must be >= 1");
    }
    if (!is_pow2(block_bytes) || block_bytes < 8) {
        throw ConfigError("generator: block must be a power of two >= 8");
    }
    if (stride == 0) {
        throw ConfigError("generator: stride must be >= 1");
    }
}

std::string GeneratorSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case GeneratorKind::Stream:
        os << "stream:n=" << n;
        break;
    case GeneratorKind::Loop:
        os << "loop:ws=" << ws << ",passes=" << passes;
        break;
    case GeneratorKind::Mixed: {
        os << "mixed:p=" << shortest(p) << ",n=" << n << ",distance=" << distance << ",touches=" << touches;
        break;
    }
    }
    os << ",cores=" << cores << ",shared=" << (shared ? 1 : 0) << ",w=" << shortest(write_ratio) << ",pc=0x" << std::hex << pc
       << std::dec << ",ipa=" << ipa << ",block=" << block_bytes << ",stride=" << stride << ",base=0x" << std::hex
       << base;
    return os.str();
}

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
    GeneratorSpec spec;
    std::string_view rest(text);
    const auto colon = rest.find(':');
    const std::string_view name = rest.substr(0, colon);
    if (name == "stream") {
        spec.kind = GeneratorKind::Stream;
    } else if (name == "loop") {
        spec.kind = GeneratorKind::Loop;
    } else if (name == "mixed") {
        spec.kind = GeneratorKind::Mixed;
    } else {
        throw ConfigError("unknown generator '" + std::string(name) + "' (expected stream, loop or mixed)");
    }
    rest = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("generator parameter '" + std::string(item) + "' is not key=value");
        }
        const std::string_view key = item.substr(0, eq);
        const std::string_view val = item.substr(eq + 1);
        if (key == "n") {
            spec.n = parse_uint(key, val);
        } else if (key == "ws") {
            spec.ws = parse_uint(key, val);
        } else if (key == "passes") {
            spec.passes = parse_uint(key, val);
        } else if (key == "p") {
            spec.p = parse_double(key, val);
        } else if (key == "distance" || key == "d") {
            spec.distance = parse_uint(key, val);
        } else if (key == "touches" || key == "k") {
            spec.touches = parse_uint(key, val);
        } else if (key == "cores") {
            spec.cores = static_cast<std::uint32_t>(parse_uint(key, val));
        } else if (key == "shared") {
            spec.shared = parse_uint(key, val) != 0;
        } else if (key == "w") {
            spec.write_ratio = parse_double(key, val);
        } else if (key == "pc") {
            spec.pc = parse_uint(key, val);
        } else if (key == "ipa") {
            spec.ipa = static_cast<std::uint32_t>(parse_uint(key, val));
        } else if (key == "block") {
            spec.block_bytes = parse_uint(key, val);
        } else if (key == "stride") {
            spec.stride = parse_uint(key, val);
        } else if (key == "base") {
            spec.base = parse_uint(key, val);
        } else {
            throw ConfigError("unknown generator parameter '" + std::string(key) + "'");
        }
    }
    spec.validate();
    return spec;
}

Trace gen_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<Trace> per_core;
    per_core.reserve(spec.cores);
    for (std::uint32_t c = 0; c < spec.cores; ++c) {
        per_core.push_back(generate_core(spec, seed, c));
    }
    Trace out;
    std::size_t longest = 0;
    for (const auto& t : per_core) {
        longest = std::max(longest, t.size());
    }
    for (std::size_t i = 0; i < longest; ++i) {
        for (const auto& t : per_core) {
            if (i < t.size()) {
                out.push_back(t[i]);
            }
        }
    }
    return out;
}

} // namespace rdsim
