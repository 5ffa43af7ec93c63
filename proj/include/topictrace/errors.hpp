#pragma once

#include <stdexcept>
#include <string>

namespace topictrace {

// Error categories aligned with the CLI exit codes: config errors exit 2,
// data errors exit 3, numeric failures exit 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace topictrace
