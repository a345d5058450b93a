#include "mixsob/flow.hpp"

#include <cmath>

#include "mixsob/error.hpp"
#include "mixsob/operator_solver.hpp"

namespace mixsob {

namespace {

struct State {
    std::vector<double> u, Au;
    double value = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Normalizes u to unit 2*-norm and evaluates Q.
State evaluate(const OperatorSolver& op, std::vector<double> u, double lambda, double q) {
    const Grid& g = op.forms().grid();
    const double nrm = lq_norm(g, u, q);
    require(nrm > 0.0 && std::isfinite(nrm), "flow iterate vanished");
    for (auto& v : u) v /= nrm;
    State st;
    st.Au.resize(u.size());
    op.apply(u, st.Au);
    st.value = mass_dot(g, u, st.Au) - lambda * mass_dot(g, u, u);
    st.u = std::move(u);
    return st;
}

// Gradient of Q on the unit 2*-sphere (mass Riesz representative).
void gradient(const State& st, double lambda, double q, std::vector<double>& g) {
    for (std::size_t i = 0; i < st.u.size(); ++i) {
        const double ui = st.u[i];
        g[i] = 2.0 * (st.Au[i] - lambda * ui - st.value * std::pow(std::abs(ui), q - 2.0) * ui);
    }
}

}  // namespace

double participation_ratio(const GridFunction& u) {
    double s2 = 0.0, s4 = 0.0;
    for (double v : u.values()) {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    require(s4 > 0.0, "participation ratio of the zero function");
    return s2 * s2 / s4 * u.mask()->grid().cell_volume();
}

double shifted_quotient(const MixedForms& forms, const GridFunction& u, double lambda) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    const double n2 = lq_norm(u, two_star_value(forms.grid().n));
    require(n2 > 0.0, "quotient of the zero function");
    const double l2 = lq_norm(u, 2.0);
    return (forms.rho_squared(u.values()) - lambda * l2 * l2) / (n2 * n2);
}

FlowResult normalized_flow(const MixedForms& forms, const GridFunction& start, const FlowOptions& options) {
    require(same_mask(forms.mask(), start.mask()), "start function lives on a different mask");
    const double q = two_star_value(forms.grid().n);
    const double lambda = options.lambda;
    const std::size_t N = forms.size();
    OperatorSolver op(forms, FormPart::mixed);

    State cur = evaluate(op, std::vector<double>(start.values().begin(), start.values().end()), lambda, q);
    std::vector<double> g(N), z(N), g_new(N), z_new(N), trial(N);
    gradient(cur, lambda, q, g);
    op.precondition(g, z);

    FlowResult res;
    res.value_history.push_back(cur.value);
    res.participation_history.push_back(participation_ratio(GridFunction(forms.mask(), cur.u)));

    double step = options.initial_step;
    int stagnant = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        State next;
        bool accepted = false;
        while (step >= options.step_floor) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = cur.u[i] - step * z[i];
            next = evaluate(op, trial, lambda, q);
            if (next.value < cur.value) {
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
        gradient(next, lambda, q, g_new);
        op.precondition(g_new, z_new);
        // BB2 step in the preconditioned metric.
        double sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double s = next.u[i] - cur.u[i];
            const double dg = g_new[i] - g[i];
            sy += s * dg;
            yy += dg * (z_new[i] - z[i]);
        }
        const double change = std::abs(cur.value - next.value) / std::max(std::abs(next.value), 1e-300);
        cur = std::move(next);
        g.swap(g_new);
        z.swap(z_new);
        step = (sy > 0.0 && yy > 0.0 && std::isfinite(sy / yy)) ? sy / yy : 2.0 * step;
        res.value_history.push_back(cur.value);
        res.participation_history.push_back(participation_ratio(GridFunction(forms.mask(), cur.u)));
        stagnant = change < options.value_tol ? stagnant + 1 : 0;
        if (stagnant >= options.patience) {
            res.converged = true;
            break;
        }
    }

    for (auto& v : cur.u) v = std::abs(v);
    State fin = evaluate(op, cur.u, lambda, q);
    res.value = fin.value;
    res.minimizer = GridFunction(forms.mask(), std::move(fin.u));
    return res;
}

}  // namespace mixsob
