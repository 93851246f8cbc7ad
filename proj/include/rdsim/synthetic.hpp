#pragma once

#include <cstdint>
#include <string>

#include "rdsim/trace.hpp"

namespace rdsim {

enum class GeneratorKind { Stream, Loop, Mixed };

// Parameters for the synthetic workload generators.
//
//   stream   n distinct blocks, each touched once.
//   loop     ws blocks visited cyclically for `passes` passes.
//   mixed    n distinct blocks; each is "reused" with probability p, in which
//            case it is touched `touches` times in total, `distance` events apart.
//
// Textual form: "<kind>:key=value,key=value", e.g. "mixed:p=0.3,n=2000".
// Keys common to all kinds: cores, shared (0/1), w (write ratio), pc, ipa
// (instructions per access), block (bytes), stride (blocks), base (hex).
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Stream;
    std::uint64_t n = 1024;
    std::uint64_t ws = 64;
    std::uint64_t passes = 2;
    double p = 0.5;
    std::uint64_t distance = 64;
    std::uint64_t touches = 3;

    std::uint32_t cores = 1;
    bool shared = false;
    double write_ratio = 0.0;
    Addr pc = 0x400000;
    std::uint32_t ipa = 4;
    std::uint64_t block_bytes = 64;
    std::uint64_t stride = 1;
    Addr base = 0;

    // Throws ConfigError on out-of-range parameters.
    void validate() const;

    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] static GeneratorSpec parse(const std::string& text);
};

// Deterministic in (spec, seed). With cores > 1 the per-core sequences are
// interleaved round-robin; unless `shared`, each core gets a disjoint region.
[[nodiscard]] Trace gen_synthetic(const GeneratorSpec& spec, std::uint64_t seed);

} // namespace rdsim
