#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdsim/address.hpp"

namespace rdsim {

enum class AccessKind : std::uint8_t { Read = 0, Write = 1 };

// One memory reference. icount_delta counts the instructions this core
// committed since its previous event, this access included.
struct AccessEvent {
    std::uint32_t core = 0;
    Addr pc = 0;
    Addr addr = 0;
    AccessKind kind = AccessKind::Read;
    std::uint32_t icount_delta = 1;

    friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

using Trace = std::vector<AccessEvent>;

// Text format, one event per line:
//   <core> <R|W> <pc-hex> <addr-hex> <icount_delta>
// Lines starting with '#' and blank lines are skipped.
class TraceReader {
public:
    explicit TraceReader(std::istream& in) : in_(in) {}

    // Next event, or nullopt at end of stream. Throws ParseError.
    std::optional<AccessEvent> next();

    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::string buf_;
};

[[nodiscard]] Trace parse_trace(std::istream& in);
[[nodiscard]] Trace parse_trace(const std::string& text);
void serialize_trace(std::ostream& out, std::span<const AccessEvent> events);
[[nodiscard]] std::string serialize_trace(std::span<const AccessEvent> events);

// Binary layout (little-endian): magic "RDTB", u32 version = 1, u64 record
// count, then per record: u32 core, u8 kind, u64 pc, u64 addr, u32 icount_delta.
inline constexpr std::size_t kBinaryRecordBytes = 25;
void write_binary_trace(std::ostream& out, std::span<const AccessEvent> events);
[[nodiscard]] Trace read_binary_trace(std::istream& in);

// Loads either format (binary is detected by its magic). Throws ConfigError
// naming the path if the file cannot be opened.
[[nodiscard]] Trace load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path, std::span<const AccessEvent> events, bool binary = false);

// Throws ConfigError if a core index is out of range or a core's first event
// has icount_delta == 0.
void validate_trace(std::span<const AccessEvent> events, std::uint32_t cores);

[[nodiscard]] std::uint32_t cores_in(std::span<const AccessEvent> events);

} // namespace rdsim
