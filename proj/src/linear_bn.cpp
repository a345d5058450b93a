#include "mixsob/linear_bn.hpp"

#include <algorithm>
#include <cmath>

#include "mixsob/error.hpp"
#include "mixsob/operator_solver.hpp"
#include "mixsob/sobolev.hpp"

namespace mixsob {

double q_lambda(const MixedForms& forms, const GridFunction& u, double lambda) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    const double l2 = lq_norm(u, 2.0);
    return forms.rho_squared(u.values()) - lambda * l2 * l2;
}

Minimization minimize_s_lambda(const MixedForms& forms, double lambda, const FlowOptions& options,
                               std::optional<GridFunction> start) {
    require(lambda > 0.0, "lambda must be positive");
    if (!start) start = first_eigen_mixed(forms).eigenfunction;
    FlowOptions opt = options;
    opt.lambda = lambda;
    auto flow = normalized_flow(forms, *start, opt);
    Minimization out;
    out.value = flow.value;
    out.minimizer = std::move(flow.minimizer);
    out.iterations = flow.iterations;
    out.converged = flow.converged;
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::plateau: return "plateau";
        case Regime::window: return "window";
        case Regime::supercritical: return "supercritical";
    }
    return "unknown";
}

std::vector<double> lambda_grid(double lambda_1, int samples, double factor) {
    require(samples >= 5, "lambda grid needs at least five samples");
    require(lambda_1 > 0.0 && factor > 0.0, "lambda grid needs a positive range");
    std::vector<double> out(samples);
    for (int i = 0; i < samples; ++i) out[i] = factor * lambda_1 * (i + 1) / samples;
    return out;
}

QuotientCurve trace_curve(const MixedForms& forms, const std::vector<double>& lambdas, const CurveOptions& options) {
    require(lambdas.size() >= 5, "curve needs at least five lambda samples");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        require(lambdas[i] > 0.0, "lambda samples must be positive");
        require(i == 0 || lambdas[i] > lambdas[i - 1], "lambda samples must be ascending");
    }
    const int n = forms.grid().n;
    QuotientCurve c;
    c.lambda_1s = first_eigen_fractional(forms).lambda;
    const auto mixed = first_eigen_mixed(forms);
    c.lambda_1 = mixed.lambda;

    std::optional<GridFunction> warm;
    for (double lam : lambdas) {
        auto best = minimize_s_lambda(forms, lam, options.flow, mixed.eigenfunction);
        if (warm) {
            auto w = minimize_s_lambda(forms, lam, options.flow, *warm);
            if (w.value < best.value) best = std::move(w);
        }
        CurveSample smp;
        smp.lambda = lam;
        smp.value = best.value;
        smp.iterations = best.iterations;
        smp.converged = best.converged;
        c.samples.push_back(smp);
        if (options.keep_minimizers) c.minimizers.push_back(best.minimizer);
        warm = std::move(best.minimizer);
    }

    c.plateau = options.plateau_reference.value_or(c.samples.front().value);
    c.plateau_tol = options.plateau_tol > 0.0 ? options.plateau_tol : 0.02 * talenti_constant(n);
    const double vol_factor = std::pow(forms.mask()->measure(), 2.0 / n);
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        auto& smp = c.samples[i];
        if (smp.value >= c.plateau - c.plateau_tol) c.lambda_star = smp.lambda;
        if (i == 0) continue;
        const auto& prev = c.samples[i - 1];
        c.max_increase = std::max(c.max_increase, smp.value - prev.value);
        c.max_jump = std::max(c.max_jump, std::abs(smp.value - prev.value));
        c.lipschitz_bound = std::max(c.lipschitz_bound, (smp.lambda - prev.lambda) * vol_factor);
        if (!c.zero_crossing && prev.value > 0.0 && smp.value <= 0.0)
            c.zero_crossing = prev.lambda + (smp.lambda - prev.lambda) * prev.value / (prev.value - smp.value);
    }
    for (auto& smp : c.samples) {
        if (c.lambda_star && smp.lambda <= *c.lambda_star) smp.regime = Regime::plateau;
        else if (smp.lambda < c.lambda_1) smp.regime = Regime::window;
        else smp.regime = Regime::supercritical;
    }
    return c;
}

BNSolution extract_solution(double value, const GridFunction& minimizer, const MixedForms& forms, double lambda,
                            std::uint64_t seed) {
    require(value > 0.0, "extraction needs a positive quotient value; lambda is at or beyond the first eigenvalue");
    require(same_mask(forms.mask(), minimizer.mask()), "minimizer lives on a different mask");
    const int n = forms.grid().n;
    const double q = two_star_value(n);
    const GridFunction u = minimizer.scaled(std::pow(value, (n - 2.0) / 4.0));

    const OperatorSolver op(forms, FormPart::mixed);
    std::vector<double> rhs(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = lambda * u[i] + std::pow(std::abs(u[i]), q - 2.0) * u[i];

    BNSolution sol;
    sol.lambda = lambda;
    sol.residual = weak_residual(op, u.values(), rhs, seed);
    const double l2 = lq_norm(u, 2.0);
    const double lq = std::pow(lq_norm(u, q), q);
    sol.identity_error = std::abs(forms.rho_squared(u.values()) - lambda * l2 * l2 - lq) / lq;
    const auto v = u.values();
    sol.min_value = *std::min_element(v.begin(), v.end());
    sol.max_value = *std::max_element(v.begin(), v.end());
    sol.positive_fraction =
        static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; })) / v.size();
    sol.u = u;
    return sol;
}

double stationarity_residual(const MixedForms& forms, const GridFunction& w, double lambda, double value,
                             std::uint64_t seed) {
    require(same_mask(forms.mask(), w.mask()), "minimizer lives on a different mask");
    const double q = two_star_value(forms.grid().n);
    const OperatorSolver op(forms, FormPart::mixed);
    std::vector<double> rhs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) rhs[i] = lambda * w[i] + value * std::pow(std::abs(w[i]), q - 2.0) * w[i];
    return weak_residual(op, w.values(), rhs, seed);
}

bool small_ball_check(const GridFunction& u) {
    const int n = u.mask()->grid().n;
    return lq_norm(u, two_star_value(n)) <= std::pow(talenti_constant(n), (n - 2.0) / 4.0);
}

nlohmann::json to_json(const QuotientCurve& c) {
    nlohmann::json j;
    j["lambda_1s"] = c.lambda_1s;
    j["lambda_1"] = c.lambda_1;
    j["plateau"] = c.plateau;
    j["plateau_tol"] = c.plateau_tol;
    j["lambda_star"] = c.lambda_star ? nlohmann::json(*c.lambda_star) : nlohmann::json();
    j["zero_crossing"] = c.zero_crossing ? nlohmann::json(*c.zero_crossing) : nlohmann::json();
    j["max_increase"] = c.max_increase;
    j["max_jump"] = c.max_jump;
    j["lipschitz_bound"] = c.lipschitz_bound;
    auto& arr = j["samples"] = nlohmann::json::array();
    for (const auto& s : c.samples)
        arr.push_back({{"lambda", s.lambda},
                       {"value", s.value},
                       {"iterations", s.iterations},
                       {"converged", s.converged},
                       {"regime", to_string(s.regime)}});
    return j;
}

nlohmann::json to_json(const BNSolution& s) {
    return {{"lambda", s.lambda},           {"residual", s.residual},   {"identity_error", s.identity_error},
            {"min_value", s.min_value},     {"max_value", s.max_value}, {"positive_fraction", s.positive_fraction},
            {"norm_2star", lq_norm(s.u, two_star_value(s.u.mask()->grid().n))}};
}

}  // namespace mixsob
