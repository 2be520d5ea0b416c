#pragma once

#include <stdexcept>
#include <string>

namespace citegrav {

// Bad or missing run configuration. CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data. CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Estimation cannot proceed (rank deficiency, too few observations, ...).
// CLI exit code 3.
struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace citegrav
