#pragma once

#include <functional>
#include <limits>
#include <string>

namespace mixsob {

/// Radial function on [0, inf) with analytic derivative.
///
/// `scale` is the length on which the profile varies near the origin and
/// `support` its support radius (infinity when not compactly supported);
/// quadrature places its panel breakpoints from these two.
struct RadialProfile {
    int n = 3;
    std::string kind;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    double scale = 1.0;
    double support = std::numeric_limits<double>::infinity();

    double operator()(double r) const { return value(r); }
    bool compact() const { return support < std::numeric_limits<double>::infinity(); }
};

/// (1 + r^2)^((2-n)/2), unnormalized.
RadialProfile aubin_talenti_shape(int n);
/// c t^((n-2)/2) (1 + (t r)^2)^((2-n)/2) with c making the 2*-norm one; t
/// is an inverse width, so the rho^2 excess decays like t^(2s-2) as t grows.
RadialProfile aubin_talenti_profile(int n, double t);
/// eps^((n-2)/2) / (r^2 + eps^2)^((n-2)/2).
RadialProfile u_eps_profile(int n, double eps);
/// phi(x/r) U_eps(x), normalized to unit 2*-norm. phi = 1 on [0, 1/2],
/// 0 on [1, inf), with a smooth monotone bridge in between.
RadialProfile eta_profile(int n, double eps, double r);
RadialProfile custom_profile(int n, std::function<double(double)> value, std::function<double(double)> derivative,
                             double scale, double support, std::string label = "custom");

/// Area of the unit sphere S^{n-1}.
double sphere_area(int n);

/// Smooth nonincreasing cutoff: 1 on [0, 1/2], 0 on [1, inf).
double smooth_cutoff(double t);
double smooth_cutoff_derivative(double t);

struct QuadratureValue {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
};

/// Integral of f(r) r^(n-1) dr over [0, inf) times the sphere area.
QuadratureValue radial_integral(const RadialProfile& p, const std::function<double(double)>& f);
/// (sigma int |u|^q r^(n-1) dr)^(1/q).
double radial_lq_norm(const RadialProfile& p, double q);
/// ||grad u||_2^2.
double radial_gradient_sq(const RadialProfile& p);

/// Double-sphere angular integral K with
///   int int F(|x|, |y|) |x-y|^(-n-2s) dx dy = int int F(r, rho) K(r, rho) r^(n-1) rho^(n-1) dr drho.
/// Closed form for n = 3, a one-dimensional hypergeometric integral for n >= 4.
/// The numeric variant integrates over the polar angle and serves as a check.
double angular_kernel(int n, double s, double r, double rho);
double angular_kernel_numeric(int n, double s, double r, double rho);

/// [u]_s^2 over all of R^n by double radial quadrature. Throws
/// ConvergenceError (with the partial sum as achieved value) when the
/// far-field shells do not decay, i.e. the seminorm is infinite.
QuadratureValue radial_gagliardo(const RadialProfile& p, double s);

}  // namespace mixsob
