#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bolasso {

/// Malformed or inconsistent input (bad dimensions, non-finite values, bad config).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A regularization level outside the range covered by a computed path.
class RangeError : public std::out_of_range {
public:
    RangeError(const std::string& msg, double lo, double hi)
        : std::out_of_range(msg), lo_(lo), hi_(hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// A linear system that must be nonsingular is not.
class SingularError : public std::runtime_error {
public:
    SingularError(const std::string& msg, std::vector<int> indices)
        : std::runtime_error(msg), indices_(std::move(indices)) {}
    const std::vector<int>& indices() const noexcept { return indices_; }

private:
    std::vector<int> indices_;
};

/// File system failures (unreadable input, unwritable output directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bolasso
