#include "mixsob/spectral.hpp"

#include <cmath>
#include <numeric>

#include "mixsob/error.hpp"
#include "mixsob/operator_solver.hpp"

namespace mixsob {

namespace {

void normalize(const Grid& g, std::vector<double>& x) {
    const double nrm = std::sqrt(mass_dot(g, x, x));
    for (auto& v : x) v /= nrm;
}

}  // namespace

EigenResult first_eigen(const MixedForms& forms, FormPart part, const EigenOptions& options,
                        std::optional<GridFunction> start) {
    const Grid& g = forms.grid();
    const std::size_t N = forms.size();
    std::vector<double> x(N, 1.0);
    if (start) {
        require(same_mask(start->mask(), forms.mask()), "start vector lives on a different mask");
        x.assign(start->values().begin(), start->values().end());
        require(std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; }), "start vector is zero");
    }
    normalize(g, x);

    OperatorSolver op(forms, part);
    std::vector<double> Ax(N), y(N);
    op.apply(x, Ax);
    double lambda = mass_dot(g, x, Ax);

    EigenResult res{0.0, GridFunction(forms.mask()), 0.0, 0, N == 1};
    if (N == 1) {
        res.lambda = lambda;
        res.eigenfunction = GridFunction(forms.mask(), x);
        return res;
    }

    for (int it = 1; it <= options.max_iterations; ++it) {
        for (std::size_t i = 0; i < N; ++i) y[i] = x[i] / lambda;
        op.solve(x, y, 1e-3 * options.residual_tol, 2000);
        normalize(g, y);
        x.swap(y);
        op.apply(x, Ax);
        const double next = mass_dot(g, x, Ax);
        double r2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) r2 += (Ax[i] - next * x[i]) * (Ax[i] - next * x[i]);
        const double residual = std::sqrt(r2 * g.cell_volume()) / next;
        const double change = std::abs(next - lambda) / next;
        lambda = next;
        if (change < options.change_tol && residual < options.residual_tol) {
            if (std::accumulate(x.begin(), x.end(), 0.0) < 0.0)
                for (auto& v : x) v = -v;
            res.lambda = lambda;
            res.eigenfunction = GridFunction(forms.mask(), x);
            res.residual = residual;
            res.iterations = it;
            return res;
        }
    }
    throw ConvergenceError("inverse iteration did not converge", lambda);
}

EigenResult first_eigen_fractional(const MixedForms& forms, const EigenOptions& options) {
    return first_eigen(forms, FormPart::fractional, options);
}

EigenResult first_eigen_local(const MixedForms& forms, const EigenOptions& options) {
    return first_eigen(forms, FormPart::local, options);
}

EigenResult first_eigen_mixed(const MixedForms& forms, const EigenOptions& options) {
    return first_eigen(forms, FormPart::mixed, options);
}

nlohmann::json to_json(const EigenResult& r) {
    return {{"lambda", r.lambda}, {"residual", r.residual}, {"iters", r.iterations}, {"degenerate", r.degenerate}};
}

}  // namespace mixsob
