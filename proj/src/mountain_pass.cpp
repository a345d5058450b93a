#include "mixsob/mountain_pass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mixsob/error.hpp"
#include "mixsob/operator_solver.hpp"
#include "mixsob/parallel.hpp"
#include "mixsob/sobolev.hpp"

namespace mixsob {

Exponents exponents(double s, int n, double p) {
    require(n >= 3, "dimension must be at least 3");
    require(s > 0.0 && s < 1.0, "fractional order must lie in (0, 1)");
    const double q = two_star_value(n);
    require(p > 1.0 && p < q - 1.0, "p must lie in (1, 2* - 1)");
    Exponents e;
    e.s = s;
    e.n = n;
    e.p = p;
    e.kappa = std::min(2.0 - 2.0 * s, n - 2.0);
    e.beta = n - (p + 1.0) * (n - 2.0) / 2.0;
    e.N = n - (n - 2.0) * (p + 1.0);
    e.case1 = e.kappa > e.beta;
    return e;
}

Competitor competitor(double eps, double r, double s, int n) {
    require(eps > 0.0 && r > 0.0, "eps and r must be positive");
    Competitor c;
    c.profile = eta_profile(n, eps, r);
    c.eps = eps;
    c.r = r;
    c.s = s;
    c.gradient = radial_gradient_sq(c.profile);
    c.gagliardo = radial_gagliardo(c.profile, s).value;
    c.A = c.gradient + c.gagliardo;
    const double q = two_star_value(n);
    c.B = std::pow(radial_lq_norm(c.profile, q), q);
    c.expansion_warning = eps >= 0.25 * r;
    return c;
}

double competitor_lp(const Competitor& c, double p) { return std::pow(radial_lq_norm(c.profile, p + 1.0), p + 1.0); }

PathMax sup_over_path(double A, double C, double lambda, double p, int n) {
    require(A > 0.0 && C >= 0.0 && lambda >= 0.0, "path coefficients need A > 0, C >= 0, lambda >= 0");
    const double q = two_star_value(n);
    auto g = [&](double t) { return 0.5 * A * t * t - std::pow(t, q) / q - lambda * C * std::pow(t, p + 1.0) / (p + 1.0); };
    // g'(t) / t, strictly decreasing on t > 0.
    auto h = [&](double t) { return A - std::pow(t, q - 2.0) - lambda * C * std::pow(t, p - 1.0); };
    auto dh = [&](double t) {
        return -(q - 2.0) * std::pow(t, q - 3.0) - lambda * C * (p - 1.0) * std::pow(t, p - 2.0);
    };

    double lo = 0.0, hi = std::pow(A, 1.0 / (q - 2.0));
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        if (g1 < g2) {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = g(x1);
        }
    }
    double t = 0.5 * (lo + hi);
    // Newton on g'/t, kept inside the a priori bracket.
    const double cap = std::pow(A, 1.0 / (q - 2.0));
    for (int it = 0; it < 20 && t > 0.0; ++it) {
        const double step = h(t) / dh(t);
        const double next = std::clamp(t - step, 0.5 * t, std::min(2.0 * t, cap));
        if (next == t) break;
        t = next;
        if (std::abs(step) <= 1e-16 * t) break;
    }
    return {t, g(t)};
}

double threshold(int n) { return std::pow(talenti_constant(n), 0.5 * n) / n; }

std::vector<double> dyadic_grid(int k_first, int k_last, int step) {
    require(step > 0 && k_last >= k_first, "dyadic grid needs k_last >= k_first and a positive step");
    std::vector<double> out;
    for (int k = k_first; k <= k_last; k += step) out.push_back(std::ldexp(1.0, -k));
    return out;
}

std::vector<Competitor> competitor_sweep(double s, int n, const std::vector<double>& eps_grid, double r) {
    require(!eps_grid.empty(), "competitor sweep needs eps samples");
    std::vector<double> eps(eps_grid);
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<Competitor> out(eps.size());
    parallel_for(eps.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = competitor(eps[i], r, s, n);
    });
    return out;
}

DichotomyReport dichotomy_scan(double s, int n, double p, const std::vector<double>& eps_grid,
                               const std::vector<double>& lambdas, const DichotomyOptions& options) {
    exponents(s, n, p);
    return dichotomy_scan(competitor_sweep(s, n, eps_grid, options.r), p, lambdas, options);
}

DichotomyReport dichotomy_scan(std::vector<Competitor> competitors, double p, const std::vector<double>& lambdas,
                               const DichotomyOptions& options) {
    require(!competitors.empty() && !lambdas.empty(), "dichotomy scan needs eps and lambda samples");
    for (double l : lambdas) require(l > 0.0, "lambda samples must be positive");
    std::sort(competitors.begin(), competitors.end(), [](const Competitor& a, const Competitor& b) { return a.eps > b.eps; });
    const int n = competitors.front().profile.n;
    DichotomyReport rep;
    rep.exps = exponents(competitors.front().s, n, p);
    rep.lambdas = lambdas;
    const double thr = threshold(n);
    const double S = talenti_constant(n);
    rep.competitors = std::move(competitors);
    std::vector<double> eps;
    for (const auto& c : rep.competitors) eps.push_back(c.eps);
    std::vector<double> Cs(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        Cs[i] = competitor_lp(rep.competitors[i], p);
        if (rep.competitors[i].expansion_warning) rep.note = "some eps are not small against r/4";
    }

    auto report = [&](std::size_t i, double lambda) {
        const auto& c = rep.competitors[i];
        const auto pm = sup_over_path(c.A, Cs[i], lambda, p, n);
        PathReport r;
        r.eps = c.eps;
        r.r = c.r;
        r.lambda = lambda;
        r.A = c.A;
        r.B = c.B;
        r.C = Cs[i];
        r.t_star = pm.t_star;
        r.sup = pm.value;
        r.threshold = thr;
        r.below = pm.value < thr;
        return r;
    };

    rep.witness_eps.assign(lambdas.size(), std::nullopt);
    for (std::size_t i = 0; i < eps.size(); ++i)
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            auto r = report(i, lambdas[j]);
            if (r.below && !rep.witness_eps[j]) rep.witness_eps[j] = r.eps;
            rep.reports.push_back(r);
        }
    rep.all_witnessed = std::all_of(rep.witness_eps.begin(), rep.witness_eps.end(), [](auto& w) { return w.has_value(); });

    if (!rep.exps.case1) {
        // Smallest lambda_0 over the eps grid, each bracketed by doubling then
        // geometric bisection.
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (report(i, std::numeric_limits<double>::min()).below) continue;
            double lo = 0.0, hi = 1.0;
            while (!report(i, hi).below && hi < options.lambda_max) {
                lo = hi;
                hi *= 2.0;
            }
            if (!report(i, hi).below) continue;
            if (lo == 0.0) {
                lo = hi;
                while (report(i, lo).below && lo > 1e-300) lo *= 0.5;
            }
            while (hi / lo - 1.0 > options.bisection_tol) {
                const double mid = std::sqrt(lo * hi);
                (report(i, mid).below ? hi : lo) = mid;
            }
            if (!rep.lambda0 || hi < *rep.lambda0) {
                rep.lambda0 = hi;
                rep.lambda0_eps = eps[i];
                rep.sup_below_lambda0 = report(i, lo).sup;
                rep.sup_above_lambda0 = report(i, hi).sup;
            }
        }
        if (rep.lambda0) rep.verdict_flips = rep.sup_below_lambda0 >= thr && rep.sup_above_lambda0 < thr;
        else rep.note = "no lambda_0 found below the search ceiling";
    }

    std::vector<double> fx, fa, fc;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        fx.push_back(eps[i]);
        fa.push_back(rep.competitors[i].A - S);
        fc.push_back(Cs[i]);
    }
    const int keep = static_cast<int>(fx.size()) - options.discard_largest;
    if (keep >= 3 && std::all_of(fa.begin(), fa.end(), [](double v) { return v > 0.0; }))
        rep.kappa_fit = fit_log_log(fx, fa, options.discard_largest);
    if (keep >= 3) rep.beta_fit = fit_log_log(fx, fc, options.discard_largest);
    return rep;
}

namespace {

// sum of |v|^e over v+ (positive_part) or |v|, times h^n.
double power_sum(const GridFunction& u, double e, bool positive_part) {
    double acc = 0.0;
    for (double v : u.values()) {
        const double w = positive_part ? std::max(v, 0.0) : std::abs(v);
        acc += std::pow(w, e);
    }
    return acc * u.mask()->grid().cell_volume();
}

double energy(const MixedForms& forms, const GridFunction& u, double lambda, double p, bool positive_part) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    const double q = two_star_value(forms.grid().n);
    return 0.5 * forms.rho_squared(u.values()) - power_sum(u, q, positive_part) / q -
           lambda * power_sum(u, p + 1.0, positive_part) / (p + 1.0);
}

std::vector<double> mask_centroid(const DomainMask& mask) {
    std::vector<double> c(mask.grid().n, 0.0);
    for (std::size_t k = 0; k < mask.interior_count(); ++k) {
        const auto x = mask.node_point(k);
        for (std::size_t d = 0; d < c.size(); ++d) c[d] += x[d];
    }
    for (auto& v : c) v /= static_cast<double>(mask.interior_count());
    return c;
}

// The competitor sampled on the grid, centered at the mask centroid.
GridFunction sampled_competitor(const MixedForms& forms) {
    const auto& mask = *forms.mask();
    const double h = forms.grid().h;
    const double r = std::max(0.5 * mask.inradius_estimate(), 2.0 * h);
    const auto prof = eta_profile(forms.grid().n, std::min(2.0 * h, 0.25 * r), r);
    const auto c = mask_centroid(mask);
    return sample(forms.mask(), [&](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < c.size(); ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
        return prof(std::sqrt(r2));
    });
}

}  // namespace

double j_energy(const MixedForms& forms, const GridFunction& u, double lambda, double p) {
    return energy(forms, u, lambda, p, true);
}

double f_energy(const MixedForms& forms, const GridFunction& u, double lambda, double p) {
    return energy(forms, u, lambda, p, false);
}

GeometryProbe mp_geometry_probe(const MixedForms& forms, double lambda, double p, std::uint64_t seed, int battery) {
    require(lambda > 0.0, "lambda must be positive");
    const int n = forms.grid().n;
    const double q = two_star_value(n);
    require(p > 1.0 && p < q - 1.0, "p must lie in (1, 2* - 1)");
    require(battery > 0, "battery must be nonempty");
    const double Sp = 0.9 * talenti_constant(n);
    const double vol = forms.mask()->measure();
    // With a = sqrt(Sp) t, the rim bound is the path function with A = Sp.
    const double Cp = std::pow(vol, 1.0 - (p + 1.0) / q);
    auto bound = [&](double t) { return 0.5 * Sp * t * t - std::pow(t, q) / q - lambda * Cp * std::pow(t, p + 1.0) / (p + 1.0); };
    const auto pm = sup_over_path(Sp, Cp, lambda, p, n);

    GeometryProbe g;
    g.alpha = std::sqrt(Sp) * pm.t_star;
    g.beta_level = pm.value;
    g.bound_half = bound(0.5 * pm.t_star);
    g.battery = battery;

    std::mt19937_64 rng(seed);
    const auto& mask = *forms.mask();
    const double h = forms.grid().h;
    const double diam = std::max(mask.interior_diameter(), h);
    std::uniform_int_distribution<std::size_t> pick(0, mask.interior_count() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    g.rim_min = g.rim_min_half = std::numeric_limits<double>::infinity();
    for (int b = 0; b < battery; ++b) {
        const int bumps = 1 + static_cast<int>(unit(rng) * 4);
        std::vector<std::vector<double>> centers;
        std::vector<double> widths, amps;
        for (int k = 0; k < bumps; ++k) {
            centers.push_back(mask.node_point(pick(rng)));
            widths.push_back(h * std::pow(0.5 * diam / h, unit(rng)));
            amps.push_back(unit(rng) < 0.8 ? 0.2 + unit(rng) : -unit(rng));
        }
        auto u = sample(forms.mask(), [&](std::span<const double> x) {
            double v = 0.0;
            for (int k = 0; k < bumps; ++k) {
                double r2 = 0.0;
                for (int d = 0; d < n; ++d) r2 += (x[d] - centers[k][d]) * (x[d] - centers[k][d]);
                v += amps[k] * std::exp(-r2 / (widths[k] * widths[k]));
            }
            return v;
        });
        const double rho = std::sqrt(forms.rho_squared(u.values()));
        if (!(rho > 0.0)) continue;
        const double j = j_energy(forms, u.scaled(g.alpha / rho), lambda, p);
        if (j < g.beta_level) ++g.violations;
        g.rim_min = std::min(g.rim_min, j);
        g.rim_min_half = std::min(g.rim_min_half, j_energy(forms, u.scaled(0.5 * g.alpha / rho), lambda, p));
    }

    const auto eta = sampled_competitor(forms);
    const double rho_eta = std::sqrt(forms.rho_squared(eta.values()));
    double T = 2.0 * g.alpha / rho_eta;
    while (j_energy(forms, eta.scaled(T), lambda, p) >= 0.0) T *= 2.0;
    g.e = eta.scaled(T);
    g.rho_e = T * rho_eta;
    g.j_e = j_energy(forms, g.e, lambda, p);
    return g;
}

SuperlinearResult solve_superlinear(const MixedForms& forms, double lambda, double p, const SuperlinearOptions& options) {
    require(lambda > 0.0, "lambda must be positive");
    const int n = forms.grid().n;
    const double q = two_star_value(n);
    require(p > 1.0 && p < q - 1.0, "p must lie in (1, 2* - 1)");
    const Grid& grid = forms.grid();
    const std::size_t N = forms.size();
    const OperatorSolver op(forms, FormPart::mixed);

    struct State {
        std::vector<double> w, Aw;
        double A = 0.0, C = 0.0, t = 0.0, level = 0.0;
    };
    auto evaluate = [&](std::vector<double> w) {
        for (auto& v : w) v = std::abs(v);
        const double nrm = lq_norm(grid, w, q);
        require(nrm > 0.0 && std::isfinite(nrm), "superlinear iterate vanished");
        for (auto& v : w) v /= nrm;
        State st;
        st.Aw.resize(N);
        op.apply(w, st.Aw);
        st.A = mass_dot(grid, w, st.Aw);
        st.C = std::pow(lq_norm(grid, w, p + 1.0), p + 1.0);
        const auto pm = sup_over_path(st.A, st.C, lambda, p, n);
        st.t = pm.t_star;
        st.level = pm.value;
        st.w = std::move(w);
        return st;
    };
    // Envelope gradient of the level: t^2 A w - t^q w^(q-1) - lambda t^(p+1) w^p.
    auto gradient = [&](const State& st, std::vector<double>& g) {
        const double t2 = st.t * st.t, tq = std::pow(st.t, q), tp = lambda * std::pow(st.t, p + 1.0);
        for (std::size_t i = 0; i < N; ++i)
            g[i] = t2 * st.Aw[i] - tq * std::pow(st.w[i], q - 1.0) - tp * std::pow(st.w[i], p);
    };

    const auto seed = sampled_competitor(forms);
    State cur = evaluate(std::vector<double>(seed.values().begin(), seed.values().end()));
    std::vector<double> g(N), z(N), g_new(N), z_new(N), trial(N);
    gradient(cur, g);
    op.precondition(g, z);

    SuperlinearResult res;
    double step = 0.5;
    int stagnant = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        State next;
        bool accepted = false;
        while (step >= options.step_floor) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = cur.w[i] - step * z[i];
            next = evaluate(trial);
            if (next.level < cur.level) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        res.iterations = it;
        if (!accepted) {
            res.converged = true;
            break;
        }
        gradient(next, g_new);
        op.precondition(g_new, z_new);
        double sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double dw = next.w[i] - cur.w[i], dg = g_new[i] - g[i];
            sy += dw * dg;
            yy += dg * (z_new[i] - z[i]);
        }
        const double change = (cur.level - next.level) / std::max(std::abs(next.level), 1e-300);
        cur = std::move(next);
        g.swap(g_new);
        z.swap(z_new);
        step = (sy > 0.0 && yy > 0.0 && std::isfinite(sy / yy)) ? sy / yy : 2.0 * step;
        stagnant = change < options.value_tol ? stagnant + 1 : 0;
        if (stagnant >= options.patience) {
            res.converged = true;
            break;
        }
    }

    GridFunction u(forms.mask(), cur.w);
    u = u.scaled(cur.t);
    std::vector<double> rhs(N);
    for (std::size_t i = 0; i < N; ++i) rhs[i] = lambda * std::pow(u[i], p) + std::pow(u[i], q - 1.0);
    BNSolution& sol = res.solution;
    sol.lambda = lambda;
    sol.residual = weak_residual(op, u.values(), rhs, options.seed);
    const double lhs = forms.rho_squared(u.values());
    const double rhs_pair = power_sum(u, q, false) + lambda * power_sum(u, p + 1.0, false);
    sol.identity_error = std::abs(lhs - rhs_pair) / rhs_pair;
    const auto v = u.values();
    sol.min_value = *std::min_element(v.begin(), v.end());
    sol.max_value = *std::max_element(v.begin(), v.end());
    sol.positive_fraction =
        static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; })) / v.size();
    sol.u = u;
    res.energy = j_energy(forms, u, lambda, p);
    res.level = cur.level;
    return res;
}

nlohmann::json to_json(const Exponents& e) {
    return {{"s", e.s},     {"n", e.n}, {"p", e.p}, {"kappa", e.kappa}, {"beta", e.beta},
            {"N", e.N}, {"case", e.case1 ? 1 : 2}};
}

nlohmann::json to_json(const PathReport& r) {
    return {{"eps", r.eps},       {"r", r.r},         {"lambda", r.lambda}, {"A", r.A},
            {"B", r.B},           {"C", r.C},         {"t_star", r.t_star}, {"sup", r.sup},
            {"threshold", r.threshold}, {"below", r.below}};
}

namespace {

nlohmann::json fit_json(const std::optional<LogLogFit>& f) {
    if (!f) return nullptr;
    return to_json(*f);
}

}  // namespace

nlohmann::json to_json(const DichotomyReport& r) {
    nlohmann::json j;
    j["exponents"] = to_json(r.exps);
    j["threshold"] = r.reports.empty() ? 0.0 : r.reports.front().threshold;
    j["all_witnessed"] = r.all_witnessed;
    auto& w = j["witness_eps"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.lambdas.size(); ++i)
        w.push_back({{"lambda", r.lambdas[i]}, {"eps", r.witness_eps[i] ? nlohmann::json(*r.witness_eps[i]) : nlohmann::json()}});
    j["lambda0"] = r.lambda0 ? nlohmann::json(*r.lambda0) : nlohmann::json();
    j["lambda0_eps"] = r.lambda0_eps;
    j["verdict_flips"] = r.verdict_flips;
    j["kappa_fit"] = fit_json(r.kappa_fit);
    j["beta_fit"] = fit_json(r.beta_fit);
    j["note"] = r.note;
    return j;
}

}  // namespace mixsob
