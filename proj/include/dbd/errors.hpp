#pragma once

#include <stdexcept>
#include <string>

namespace dbd {

// Bad input: malformed config, out-of-range parameters, unreadable files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation that could not be completed to the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dbd
