#pragma once

#include <stdexcept>
#include <string>

namespace mixsob {

/// Rejected input: bad ranges, mismatched masks, malformed configs.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method or quadrature did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved = 0.0)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best value or error estimate reached before giving up.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace mixsob
