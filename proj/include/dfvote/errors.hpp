#pragma once

#include <stdexcept>
#include <string>

namespace dfvote {

/// Invalid model or experiment configuration. `line` is the 1-based line in
/// the config document when the error can be anchored to one, else 0.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A computation would exceed a documented size guard.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure did not reach its stated tolerance.
class ToleranceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dfvote
