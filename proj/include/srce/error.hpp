#pragma once

#include <stdexcept>
#include <string>

namespace srce {

// Invalid experiment / model configuration (bad sizes, zero variance, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed values that violate an operation's preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values, singular systems, divergence.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace srce
