#include "mixsob/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mixsob/error.hpp"

namespace mixsob {

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y, int discard_largest) {
    require(x.size() == y.size(), "fit needs matching sample arrays");
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    require(discard_largest >= 0 && static_cast<std::size_t>(discard_largest) < order.size(), "too many discarded samples");
    order.resize(order.size() - static_cast<std::size_t>(discard_largest));
    require(order.size() >= 2, "fit needs at least two samples");

    std::vector<double> lx, ly;
    for (std::size_t i : order) {
        require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive samples");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    require(sxx > 0.0, "fit needs distinct abscissae");
    LogLogFit fit;
    fit.samples = static_cast<int>(lx.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - fit.intercept - fit.slope * lx[i];
        sse += e * e;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (lx.size() > 2) {
        fit.slope_stderr = std::sqrt(sse / (k - 2.0) / sxx);
        boost::math::students_t dist(k - 2.0);
        const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
        fit.ci_low = fit.slope - q * fit.slope_stderr;
        fit.ci_high = fit.slope + q * fit.slope_stderr;
    } else {
        fit.ci_low = fit.ci_high = fit.slope;
    }
    return fit;
}

nlohmann::json to_json(const LogLogFit& f) {
    return {{"slope", f.slope},   {"intercept", f.intercept},   {"slope_stderr", f.slope_stderr},
            {"ci_low", f.ci_low}, {"ci_high", f.ci_high}, {"r_squared", f.r_squared}, {"samples", f.samples}};
}

}  // namespace mixsob
