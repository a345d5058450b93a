#pragma once

#include <span>

#include <json.hpp>

namespace mixsob {

/// Least-squares line through (log x, log y) with a 95% interval on the slope.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double r_squared = 0.0;
    int samples = 0;
};

/// Needs at least three positive samples; with exactly two the interval is
/// degenerate. `discard_largest` drops that many samples with the largest x
/// (pre-asymptotic points).
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y, int discard_largest = 0);

nlohmann::json to_json(const LogLogFit& f);

}  // namespace mixsob
