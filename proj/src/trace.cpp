#include "rdsim/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'D', 'T', 'B'};
constexpr std::uint32_t kVersion = 1;

std::string_view next_field(std::string_view& rest) {
    std::size_t b = 0;
    while (b < rest.size() && (rest[b] == ' ' || rest[b] == '\t' || rest[b] == '\r')) {
        ++b;
    }
    std::size_t e = b;
    while (e < rest.size() && rest[e] != ' ' && rest[e] != '\t' && rest[e] != '\r') {
        ++e;
    }
    std::string_view field = rest.substr(b, e - b);
    rest.remove_prefix(e);
    return field;
}

template <typename T>
T parse_number(std::string_view field, int base, std::size_t line, const char* what) {
    if (base == 16 && field.size() > 2 && field[0] == '0' && (field[1] == 'x' || field[1] == 'X')) {
        field.remove_prefix(2);
    }
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value, base);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(line, std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

template <typename T>
void put_le(std::ostream& out, T v) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return static_cast<T>(v);
}

} // namespace

std::optional<AccessEvent> TraceReader::next() {
    while (std::getline(in_, buf_)) {
        ++line_;
        std::string_view rest(buf_);
        std::string_view first = next_field(rest);
        if (first.empty() || first.front() == '#') {
            continue;
        }
        AccessEvent ev;
        ev.core = parse_number<std::uint32_t>(first, 10, line_, "core");
        std::string_view kind = next_field(rest);
        if (kind == "R") {
            ev.kind = AccessKind::Read;
        } else if (kind == "W") {
            ev.kind = AccessKind::Write;
        } else {
            throw ParseError(line_, "unknown access kind '" + std::string(kind) + "'");
        }
        ev.pc = parse_number<std::uint64_t>(next_field(rest), 16, line_, "pc");
        ev.addr = parse_number<std::uint64_t>(next_field(rest), 16, line_, "address");
        ev.icount_delta = parse_number<std::uint32_t>(next_field(rest), 10, line_, "icount_delta");
        if (!next_field(rest).empty()) {
            throw ParseError(line_, "trailing fields");
        }
        return ev;
    }
    return std::nullopt;
}

Trace parse_trace(std::istream& in) {
    TraceReader reader(in);
    Trace out;
    while (auto ev = reader.next()) {
        out.push_back(*ev);
    }
    return out;
}

Trace parse_trace(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

void serialize_trace(std::ostream& out, std::span<const AccessEvent> events) {
    char buf[96];
    for (const auto& ev : events) {
        const int n = std::snprintf(buf, sizeof buf, "%u %c 0x%llx 0x%llx %u\n", ev.core,
                                    ev.kind == AccessKind::Write ? 'W' : 'R',
                                    static_cast<unsigned long long>(ev.pc),
                                    static_cast<unsigned long long>(ev.addr), ev.icount_delta);
        out.write(buf, n);
    }
}

std::string serialize_trace(std::span<const AccessEvent> events) {
    std::ostringstream out;
    serialize_trace(out, events);
    return out.str();
}

void write_binary_trace(std::ostream& out, std::span<const AccessEvent> events) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, events.size());
    for (const auto& ev : events) {
        put_le<std::uint32_t>(out, ev.core);
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(ev.kind));
        put_le<std::uint64_t>(out, ev.pc);
        put_le<std::uint64_t>(out, ev.addr);
        put_le<std::uint32_t>(out, ev.icount_delta);
    }
}

Trace read_binary_trace(std::istream& in) {
    std::array<unsigned char, 16> header{};
    if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
        throw ParseError(0, "binary trace header truncated");
    }
    if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
        throw ParseError(0, "binary trace magic mismatch");
    }
    if (get_le<std::uint32_t>(header.data() + 4) != kVersion) {
        throw ParseError(0, "unsupported binary trace version");
    }
    const auto count = get_le<std::uint64_t>(header.data() + 8);
    Trace out;
    std::array<unsigned char, kBinaryRecordBytes> rec{};
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(rec.data()), rec.size())) {
            throw ParseError(0, "binary trace truncated at record " + std::to_string(i));
        }
        AccessEvent ev;
        ev.core = get_le<std::uint32_t>(rec.data());
        const auto kind = rec[4];
        if (kind > 1) {
            throw ParseError(0, "unknown access kind " + std::to_string(kind) + " at record " + std::to_string(i));
        }
        ev.kind = static_cast<AccessKind>(kind);
        ev.pc = get_le<std::uint64_t>(rec.data() + 5);
        ev.addr = get_le<std::uint64_t>(rec.data() + 13);
        ev.icount_delta = get_le<std::uint32_t>(rec.data() + 21);
        out.push_back(ev);
    }
    return out;
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open trace file '" + path.string() + "'");
    }
    std::array<char, 4> head{};
    in.read(head.data(), head.size());
    const bool binary = in.gcount() == 4 && head == kMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_binary_trace(in) : parse_trace(in);
}

void save_trace(const std::filesystem::path& path, std::span<const AccessEvent> events, bool binary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write trace file '" + path.string() + "'");
    }
    if (binary) {
        write_binary_trace(out, events);
    } else {
        serialize_trace(out, events);
    }
    if (!out) {
        throw ConfigError("write failed for '" + path.string() + "'");
    }
}

void validate_trace(std::span<const AccessEvent> events, std::uint32_t cores) {
    std::vector<bool> seen(cores, false);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (ev.core >= cores) {
            throw ConfigError("event " + std::to_string(i) + " targets core " + std::to_string(ev.core) +
                              " but only " + std::to_string(cores) + " cores are configured");
        }
        if (!seen[ev.core]) {
            if (ev.icount_delta == 0) {
                throw ConfigError("first event of core " + std::to_string(ev.core) + " has icount_delta 0");
            }
            seen[ev.core] = true;
        }
    }
}

std::uint32_t cores_in(std::span<const AccessEvent> events) {
    std::uint32_t n = 0;
    for (const auto& ev : events) {
        n = std::max(n, ev.core + 1);
    }
    return n;
}

} // namespace rdsim
