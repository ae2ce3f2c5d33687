#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace specbox {

/// Mismatched array extents between a field payload and its grid.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Samples fed to an accumulator out of order or non-uniformly spaced.
class OrderingError : public std::logic_error {
public:
    explicit OrderingError(const std::string& what) : std::logic_error(what) {}
};

/// Requested a mean from an averager with zero elapsed time.
class EmptyAverageError : public std::logic_error {
public:
    explicit EmptyAverageError(const std::string& what) : std::logic_error(what) {}
};

/// One config-validation violation, addressed by a dotted key path.
struct ConfigViolation {
    std::string path;
    std::string message;
};

/// Carries every violation found while validating a config, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigViolation> violations)
        : std::runtime_error(format(violations)), violations_(std::move(violations)) {}

    const std::vector<ConfigViolation>& violations() const { return violations_; }

private:
    static std::string format(const std::vector<ConfigViolation>& vs) {
        std::string s = "config validation failed:";
        for (const auto& v : vs) s += "\n  " + v.path + ": " + v.message;
        return s;
    }
    std::vector<ConfigViolation> violations_;
};

} // namespace specbox
