#include "mixsob/radial.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mixsob/error.hpp"
#include "mixsob/summation.hpp"

namespace mixsob {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

// Finest dyadic level below the profile scale at which panels start.
constexpr int kFineLevels = 14;
// Shells contributing less than this fraction are dropped.
constexpr double kTailTol = 1e-12;
// Far-field shell ratio above which the integral is declared divergent.
constexpr double kDivergentRatio = 0.97;

QuadratureValue panel(const std::function<double(double)>& f, double a, double b, unsigned depth) {
    if (!(b > a)) return {};
    double err = 0.0;
    const double v = GK::integrate(f, a, b, depth, 1e-13, &err);
    return {v, err};
}

// Sorted breakpoints in (lo, hi): dyadic multiples of the scale plus the
// support and its half, with lo and hi as endpoints.
std::vector<double> breakpoints(const RadialProfile& p, double lo, double hi) {
    std::vector<double> pts{lo, hi};
    for (double x = p.scale * std::ldexp(1.0, -kFineLevels); x < hi; x *= 2.0)
        if (x > lo) pts.push_back(x);
    if (p.compact())
        for (double x : {p.support, 0.5 * p.support})
            if (x > lo && x < hi) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::abs(a - b) <= 1e-14 * b; }),
              pts.end());
    return pts;
}

// Integral of F over [0, upper): panels on the breakpoint set up to a base
// radius, then (for an unbounded range) dyadic shells until they decay, with
// a geometric remainder.
QuadratureValue integrate_outer(const RadialProfile& p, const std::function<double(double)>& F, unsigned depth,
                                double upper = std::numeric_limits<double>::infinity()) {
    const bool bounded = upper < std::numeric_limits<double>::infinity();
    const double base = bounded ? upper : 2.0 * std::max(p.scale, p.compact() ? p.support : p.scale);
    CompensatedSum total;
    double err = 0.0;
    const auto pts = breakpoints(p, 0.0, base);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto q = panel(F, pts[i], pts[i + 1], depth);
        total.add(q.value);
        err += q.error;
    }
    if (bounded) return {total.value(), err};
    double prev = 0.0;
    int flat = 0;
    double a = base;
    for (int k = 0; k < 400; ++k, a *= 2.0) {
        auto q = panel(F, a, 2.0 * a, depth);
        total.add(q.value);
        err += q.error;
        const double cur = std::abs(q.value);
        if (cur == 0.0) break;
        if (k > 0 && prev > 0.0) {
            const double ratio = cur / prev;
            flat = ratio >= kDivergentRatio ? flat + 1 : 0;
            if (flat >= 24) throw ConvergenceError("radial integral diverges in the far field", total.value());
            if (ratio < kDivergentRatio) {
                const double remainder = q.value * ratio / (1.0 - ratio);
                if (std::abs(remainder) <= kTailTol * std::abs(total.value())) {
                    total.add(remainder);
                    err += std::abs(remainder);
                    return {total.value(), err};
                }
            }
        }
        prev = cur;
    }
    if (flat > 0) throw ConvergenceError("radial integral diverges in the far field", total.value());
    return {total.value(), err};
}

// Smooth transition: 1 at x = 1, 0 at x = 0.
double bridge(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double bridge_derivative(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    const double da = a / (x * x), db = -b / ((1.0 - x) * (1.0 - x));
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

}  // namespace

double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

double smooth_cutoff(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    return bridge(2.0 - 2.0 * t);
}

double smooth_cutoff_derivative(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    return -2.0 * bridge_derivative(2.0 - 2.0 * t);
}

RadialProfile custom_profile(int n, std::function<double(double)> value, std::function<double(double)> derivative,
                             double scale, double support, std::string label) {
    require(n >= 3, "dimension must be at least 3");
    require(scale > 0.0 && support > 0.0, "profile scale and support must be positive");
    return RadialProfile{n, std::move(label), std::move(value), std::move(derivative), scale, support};
}

RadialProfile aubin_talenti_shape(int n) {
    require(n >= 3, "dimension must be at least 3");
    const double e = 0.5 * (2.0 - n);
    return RadialProfile{n,
                         "aubin_talenti",
                         [e](double r) { return std::pow(1.0 + r * r, e); },
                         [e](double r) { return 2.0 * e * r * std::pow(1.0 + r * r, e - 1.0); },
                         1.0,
                         std::numeric_limits<double>::infinity()};
}

RadialProfile aubin_talenti_profile(int n, double t) {
    require(t > 0.0, "concentration parameter must be positive");
    const double c = 1.0 / radial_lq_norm(aubin_talenti_shape(n), 2.0 * n / (n - 2.0));
    const double e = 0.5 * (2.0 - n);
    // Width 1/t: larger t concentrates.
    const double amp = c * std::pow(t, -e);
    return RadialProfile{n,
                         "aubin_talenti",
                         [=](double r) { return amp * std::pow(1.0 + (r * t) * (r * t), e); },
                         [=](double r) {
                             const double z = r * t;
                             return amp * 2.0 * e * z * t * std::pow(1.0 + z * z, e - 1.0);
                         },
                         1.0 / t,
                         std::numeric_limits<double>::infinity()};
}

RadialProfile u_eps_profile(int n, double eps) {
    require(n >= 3, "dimension must be at least 3");
    require(eps > 0.0, "eps must be positive");
    const double e = 0.5 * (n - 2.0);
    const double amp = std::pow(eps, e);
    return RadialProfile{n,
                         "u_eps",
                         [=](double r) { return amp * std::pow(r * r + eps * eps, -e); },
                         [=](double r) { return -2.0 * e * amp * r * std::pow(r * r + eps * eps, -e - 1.0); },
                         eps,
                         std::numeric_limits<double>::infinity()};
}

RadialProfile eta_profile(int n, double eps, double r) {
    require(r > 0.0 && eps > 0.0, "eps and cutoff radius must be positive");
    const auto U = u_eps_profile(n, eps);
    RadialProfile raw{n,
                      "eta_eps",
                      [=](double x) { return smooth_cutoff(x / r) * U.value(x); },
                      [=](double x) {
                          return smooth_cutoff_derivative(x / r) / r * U.value(x) + smooth_cutoff(x / r) * U.derivative(x);
                      },
                      eps,
                      r};
    const double norm = radial_lq_norm(raw, 2.0 * n / (n - 2.0));
    auto value = raw.value;
    auto deriv = raw.derivative;
    raw.value = [value, norm](double x) { return value(x) / norm; };
    raw.derivative = [deriv, norm](double x) { return deriv(x) / norm; };
    return raw;
}

QuadratureValue radial_integral(const RadialProfile& p, const std::function<double(double)>& f) {
    const double area = sphere_area(p.n);
    const int n = p.n;
    auto F = [&](double r) { return area * f(r) * std::pow(r, n - 1); };
    return integrate_outer(p, F, 10);
}

double radial_lq_norm(const RadialProfile& p, double q) {
    require(q >= 1.0, "norm exponent must be at least 1");
    auto v = radial_integral(p, [&](double r) { return std::pow(std::abs(p.value(r)), q); });
    return std::pow(v.value, 1.0 / q);
}

double radial_gradient_sq(const RadialProfile& p) {
    return radial_integral(p, [&](double r) {
               const double d = p.derivative(r);
               return d * d;
           })
        .value;
}

namespace {

// For n >= 4 the sphere average of |e - t w|^(-n-2s) is
//   (1 - t^2)^(-1-2s) 2F1(-s, n/2-1-s; n/2; t^2),
// and the hypergeometric factor is bounded on [0, 1]. Its Euler integral,
// after x = y^(1/b), has only a mild (1 - y)^s endpoint that tanh-sinh absorbs.
double bounded_hypergeometric(int n, double s, double z) {
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(10);
    const double b = 0.5 * n - 1.0 - s;
    const double c = 0.5 * n;
    auto f = [&](double y, double yc) {
        // yc = 1 - y, accurate near the right end.
        const double log_y = y < 0.5 ? std::log(y) : std::log1p(-yc);
        const double xc = -std::expm1(log_y / b);
        return std::pow(xc, s) * std::pow(1.0 - z * (1.0 - xc), s);
    };
    const double integral = ts.integrate(f, 0.0, 1.0, 1e-14);
    return std::exp(std::lgamma(c) - std::lgamma(b) - std::lgamma(1.0 + s)) * integral / b;
}

// Chebyshev fits of bounded_hypergeometric on panels 1 - z in [2^-(k+1), 2^-k],
// which shrink geometrically toward the z = 1 branch point.
class HypergeometricTable {
public:
    static constexpr int kPanels = 44;
    static constexpr int kOrder = 20;

    HypergeometricTable(int n, double s) : n_(n), s_(s) {
        coef_.resize(kPanels);
        for (int k = 0; k < kPanels; ++k) {
            std::array<double, kOrder> f{};
            for (int j = 0; j < kOrder; ++j) {
                const double x = std::cos(std::numbers::pi * (j + 0.5) / kOrder);
                f[j] = bounded_hypergeometric(n, s, 1.0 - local_to_gap(k, x));
            }
            for (int i = 0; i < kOrder; ++i) {
                double c = 0.0;
                for (int j = 0; j < kOrder; ++j) c += f[j] * std::cos(std::numbers::pi * i * (j + 0.5) / kOrder);
                coef_[k][i] = 2.0 * c / kOrder;
            }
        }
    }

    bool matches(int n, double s) const { return n == n_ && s == s_; }

    // Argument is the gap w = 1 - z, passed separately to keep precision.
    double operator()(double gap) const {
        int e = 0;
        std::frexp(gap, &e);  // gap in [2^(e-1), 2^e)
        const int k = -e;
        if (k < 0) return eval(0, 1.0);
        if (k >= kPanels) return bounded_hypergeometric(n_, s_, 1.0 - gap);
        return eval(k, std::ldexp(gap, k + 2) - 3.0);
    }

private:
    static double local_to_gap(int k, double x) { return std::ldexp(x + 3.0, -(k + 2)); }

    double eval(int k, double x) const {
        const auto& c = coef_[k];
        double b1 = 0.0, b2 = 0.0;
        for (int i = kOrder - 1; i >= 1; --i) {
            const double b0 = 2.0 * x * b1 - b2 + c[i];
            b2 = b1;
            b1 = b0;
        }
        return x * b1 - b2 + 0.5 * c[0];
    }

    int n_;
    double s_;
    std::vector<std::array<double, kOrder>> coef_;
};

const HypergeometricTable& hypergeometric_table(int n, double s) {
    static thread_local std::vector<std::unique_ptr<HypergeometricTable>> cache;
    for (const auto& t : cache)
        if (t->matches(n, s)) return *t;
    if (cache.size() >= 16) cache.erase(cache.begin());
    cache.push_back(std::make_unique<HypergeometricTable>(n, s));
    return *cache.back();
}

}  // namespace

double angular_kernel(int n, double s, double r, double rho) {
    if (n != 3) {
        require(n >= 3, "dimension must be at least 3");
        const double big = std::max(r, rho), small = std::min(r, rho);
        const double t = small / big;
        const double sigma = sphere_area(n);
        return sigma * sigma * std::pow(big, -n - 2.0 * s) * std::pow((1.0 - t) * (1.0 + t), -1.0 - 2.0 * s) *
               hypergeometric_table(n, s)((1.0 - t) * (1.0 + t));
    }
    const double big = std::max(r, rho), small = std::min(r, rho);
    const double t = small / big;
    const double a = 1.0 + 2.0 * s;
    // |r - rho|^-a - (r + rho)^-a without cancellation.
    const double diff = std::pow(big * (1.0 + t), -a) * std::expm1(2.0 * a * std::atanh(t));
    return 8.0 * std::numbers::pi * std::numbers::pi * diff / (a * r * rho);
}

double angular_kernel_numeric(int n, double s, double r, double rho) {
    require(n >= 3, "dimension must be at least 3");
    const double big = std::max(r, rho), small = std::min(r, rho);
    const double t = small / big;
    const double expo = -0.5 * (n + 2.0 * s);
    const double gap = (1.0 - t) * (1.0 - t);
    auto f = [&](double phi) {
        const double sp = std::sin(phi);
        return 2.0 * std::pow(std::sin(2.0 * phi), n - 2) * std::pow(gap + 4.0 * t * sp * sp, expo);
    };
    const double half_pi = 0.5 * std::numbers::pi;
    CompensatedSum acc;
    double lo = 0.0;
    for (double w = std::max(1.0 - t, 1e-300) / std::sqrt(std::max(t, 1e-300)); lo < half_pi; w *= 2.0) {
        const double hi = std::min(half_pi, w);
        if (hi > lo) acc.add(panel(f, lo, hi, 0).value);
        lo = hi;
    }
    return sphere_area(n) * sphere_area(n - 1) * std::pow(big, expo * 2.0) * acc.value();
}

QuadratureValue radial_gagliardo(const RadialProfile& p, double s) {
    require(s > 0.0 && s < 1.0, "fractional order must lie in (0, 1)");
    const int n = p.n;
    // Diagonal panels are cut at r 2^-kDiagonalLevels; below that the
    // integrand behaves like delta^(1-2s) and the rest is summed in closed form.
    constexpr int kDiagonalLevels = 40;
    const double diag_ratio = std::pow(2.0, 2.0 - 2.0 * s) - 1.0;

    // I(r) = int_0^r rho^(n-1) (u(r) - u(rho))^2 K(r, rho) drho.
    auto inner = [&](double r) {
        const double ur = p.value(r);
        auto g = [&](double rho) {
            if (rho <= 0.0) return 0.0;
            const double d = ur - p.value(rho);
            return std::pow(rho, n - 1) * d * d * angular_kernel(n, s, r, rho);
        };
        CompensatedSum acc;
        const auto pts = breakpoints(p, 0.0, 0.5 * r);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc.add(panel(g, pts[i], pts[i + 1], 0).value);
        auto gd = [&](double delta) { return delta > 0.0 ? g(r - delta) : 0.0; };
        std::vector<double> dpts;
        for (int k = 1; k <= kDiagonalLevels; ++k) dpts.push_back(std::ldexp(r, -k));
        if (p.compact())
            for (double b : {p.support, 0.5 * p.support})
                if (b > 0.5 * r && b < r) dpts.push_back(r - b);
        std::sort(dpts.begin(), dpts.end());
        double lowest = 0.0;
        for (std::size_t i = 0; i + 1 < dpts.size(); ++i) {
            const double v = panel(gd, dpts[i], dpts[i + 1], 0).value;
            if (i == 0) lowest = v;
            acc.add(v);
        }
        acc.add(lowest / diag_ratio);
        return acc.value();
    };
    auto F = [&](double r) { return r > 0.0 ? 2.0 * std::pow(r, n - 1) * inner(r) : 0.0; };

    if (!p.compact()) return integrate_outer(p, F, 3);

    // Compact support S: shells out to R = 2S by quadrature, the exterior
    // r > R through T(rho) = int_R^inf r^(n-1) K(r, rho) dr, where u(r) = 0.
    const double R = 2.0 * p.support;
    auto out = integrate_outer(p, F, 3, R);
    auto T = [&](double rho) {
        // r = R v^(-1/(2s)) flattens the r^(-1-2s) decay.
        auto h = [&](double v) {
            if (v <= 0.0) return std::pow(R, -2.0 * s) / (2.0 * s) * sphere_area(n) * sphere_area(n);
            const double r = R * std::pow(v, -0.5 / s);
            return std::pow(r, n - 1) * angular_kernel(n, s, r, rho) * r / (2.0 * s * v);
        };
        CompensatedSum acc;
        double hi = 1.0;
        for (int k = 0; k < 30; ++k, hi *= 0.5) acc.add(panel(h, 0.5 * hi, hi, 0).value);
        acc.add(panel(h, 0.0, hi, 0).value);
        return acc.value();
    };
    auto tail_integrand = [&](double rho) {
        const double u = p.value(rho);
        return rho > 0.0 ? 2.0 * std::pow(rho, n - 1) * u * u * T(rho) : 0.0;
    };
    CompensatedSum tail;
    const auto pts = breakpoints(p, 0.0, p.support);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) tail.add(panel(tail_integrand, pts[i], pts[i + 1], 0).value);
    out.value += tail.value();
    return out;
}

}  // namespace mixsob
