#include "mixsob/sobolev.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mixsob/error.hpp"

namespace mixsob {

double talenti_constant(int n) {
    require(n >= 3, "dimension must be at least 3");
    return std::numbers::pi * n * (n - 2.0) * std::pow(std::tgamma(0.5 * n) / std::tgamma(static_cast<double>(n)), 2.0 / n);
}

double reciprocal_talenti_formula(int n) {
    require(n >= 3, "dimension must be at least 3");
    return 1.0 / (n * (n - 2.0) * std::numbers::pi) *
           std::pow(std::tgamma(static_cast<double>(n)) / std::tgamma(0.5 * n), 2.0 / n);
}

double aubin_talenti_quotient(int n) {
    const auto shape = aubin_talenti_shape(n);
    const double nrm = radial_lq_norm(shape, two_star_value(n));
    return radial_gradient_sq(shape) / (nrm * nrm);
}

double AubinTalenti::operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - (center.empty() ? 0.0 : center[k]);
        r2 += d * d;
    }
    return profile.value(std::sqrt(r2));
}

AubinTalenti aubin_talenti(int n, double t, std::vector<double> center) {
    require(center.empty() || static_cast<int>(center.size()) == n, "center has wrong dimension");
    AubinTalenti at;
    at.profile = aubin_talenti_profile(n, t);
    at.normalization = 1.0 / radial_lq_norm(aubin_talenti_shape(n), two_star_value(n));
    at.t = t;
    at.center = std::move(center);
    return at;
}

namespace {

void finish_report(ConcentrationReport& rep, double limit) {
    rep.monotone = true;
    rep.above_talenti = true;
    const double S = talenti_constant(rep.n);
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        if (!(rep.samples[i].quotient > S)) rep.above_talenti = false;
        if (i > 0 && rep.samples[i].quotient > rep.samples[i - 1].quotient) rep.monotone = false;
    }
    rep.limit_estimate = limit;
    if (rep.divergent) return;
    std::vector<double> x, y;
    for (const auto& smp : rep.samples) {
        if (smp.excess > 0.0) {
            x.push_back(smp.parameter);
            y.push_back(smp.excess);
        }
    }
    if (x.size() >= 4) rep.fit = fit_log_log(x, y);
    else rep.note = "fewer than four positive excess samples; no fit";
}

}  // namespace

ConcentrationReport spread_scan(int n, double s, const std::vector<double>& t_values) {
    require(t_values.size() >= 4, "concentration scan needs at least four samples");
    require(s > 0.0 && s < 1.0, "fractional order must lie in (0, 1)");
    ConcentrationReport rep;
    rep.mode = ScanMode::spread_t;
    rep.n = n;
    rep.s = s;
    const double S = talenti_constant(n);
    for (double t : t_values) {
        const auto U = aubin_talenti_profile(n, t);
        const double nrm = radial_lq_norm(U, two_star_value(n));
        const double grad = radial_gradient_sq(U);
        ConcentrationSample smp;
        smp.parameter = t;
        try {
            smp.gagliardo = radial_gagliardo(U, s).value / (nrm * nrm);
            smp.quotient = grad / (nrm * nrm) + smp.gagliardo;
            smp.excess = smp.quotient - S;
        } catch (const ConvergenceError& e) {
            smp.finite = false;
            smp.gagliardo = smp.quotient = smp.excess = std::numeric_limits<double>::infinity();
            rep.divergent = true;
            rep.note = std::string("fractional seminorm of the profile is infinite: ") + e.what();
        }
        rep.samples.push_back(smp);
    }
    if (rep.divergent) {
        finish_report(rep, std::numeric_limits<double>::infinity());
        return rep;
    }
    // Intercept of quotient against t^(2s-2).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& smp : rep.samples) {
        const double x = std::pow(smp.parameter, 2.0 * s - 2.0);
        sx += x;
        sy += smp.quotient;
        sxx += x * x;
        sxy += x * smp.quotient;
    }
    const double k = static_cast<double>(rep.samples.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    finish_report(rep, (sy - slope * sx) / k);
    return rep;
}

ConcentrationReport shrink_scan(int n, double L, int m, double radius, double s, const PointFunction& base,
                                const std::vector<double>& k_values) {
    require(k_values.size() >= 4, "concentration scan needs at least four samples");
    ConcentrationReport rep;
    rep.mode = ScanMode::shrink_k;
    rep.n = n;
    rep.s = s;
    const auto g1 = build_grid(n, L, m);
    const auto mask1 = mask_ball(g1, std::vector<double>(n, 0.0), radius);
    const auto u1 = sample(mask1, base);
    double local = 0.0;
    for (double k : k_values) {
        require(k > 0.0, "shrink factors must be positive");
        const auto gk = build_grid(n, L / k, m);
        const auto maskk = mask_ball(gk, std::vector<double>(n, 0.0), radius / k);
        const MixedForms fk(maskk, s);
        std::vector<double> vals(u1.values().begin(), u1.values().end());
        const double c = std::pow(k, 0.5 * (n - 2.0));
        for (auto& v : vals) v *= c;
        const GridFunction uk(maskk, std::move(vals));
        const double nrm = lq_norm(uk, two_star_value(n));
        local = fk.dirichlet_energy(uk.values()) / (nrm * nrm);
        ConcentrationSample smp;
        smp.parameter = k;
        smp.gagliardo = fk.gagliardo_energy(uk.values()) / (nrm * nrm);
        smp.quotient = local + smp.gagliardo;
        smp.excess = smp.gagliardo;
        rep.samples.push_back(smp);
    }
    finish_report(rep, local);
    return rep;
}

SharpConstantEstimate estimate_sharp_constant(const MixedForms& forms, const FlowOptions& options) {
    FlowOptions opt = options;
    opt.lambda = 0.0;
    const auto one = sample(forms.mask(), [](std::span<const double>) { return 1.0; });
    auto flow = normalized_flow(forms, one, opt);
    SharpConstantEstimate est;
    est.value = flow.value;
    est.minimizer = std::move(flow.minimizer);
    est.value_history = std::move(flow.value_history);
    est.participation_history = std::move(flow.participation_history);
    est.iterations = flow.iterations;
    est.first_step_decreased = est.value_history.size() > 1 && est.value_history[1] < est.value_history[0];
    est.participation_drop = 1.0 - est.participation_history.back() / est.participation_history.front();
    if (!flow.converged) throw ConvergenceError("sharp-constant flow did not settle within its budget", flow.value);
    return est;
}

}  // namespace mixsob
