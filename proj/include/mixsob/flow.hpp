#pragma once

#include <optional>
#include <vector>

#include "mixsob/forms.hpp"

namespace mixsob {

struct FlowOptions {
    double lambda = 0.0;           // shift in Q(u) = rho(u)^2 - lambda ||u||_2^2
    int max_iterations = 3000;
    double value_tol = 1e-11;      // relative change treated as stagnation
    int patience = 8;              // consecutive stagnant steps before stopping
    double step_floor = 1e-12;
    double initial_step = 0.5;
};

struct FlowResult {
    double value = 0.0;            // Q at the returned minimizer
    GridFunction minimizer;        // ||.||_{2*} = 1, nonnegative
    std::vector<double> value_history;
    std::vector<double> participation_history;
    int iterations = 0;
    bool converged = false;        // stagnated before the iteration budget
};

/// (sum u^2)^2 / sum u^4 times h^n: the volume the function effectively
/// occupies. Shrinks as mass concentrates.
double participation_ratio(const GridFunction& u);

/// Q(u) / ||u||_{2*}^2 for the mixed form, shifted by lambda.
double shifted_quotient(const MixedForms& forms, const GridFunction& u, double lambda);

/// Minimizes Q over the unit 2*-sphere by a preconditioned normalized
/// gradient flow with Barzilai-Borwein steps, halving on non-decrease. The
/// result is replaced by its absolute value, which never raises Q.
FlowResult normalized_flow(const MixedForms& forms, const GridFunction& start, const FlowOptions& options = {});

}  // namespace mixsob
