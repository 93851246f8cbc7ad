#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdsim {

// Invalid user-supplied configuration (geometry, generator spec, pool shortfall...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed trace input. line() is 1-based; 0 for binary traces (record index is in the message).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A caller broke a precondition of a cache/RD structure (duplicate insert, empty way...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Derived metrics requested from stats that cannot support them (zero cycles, zero instructions).
class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rdsim
