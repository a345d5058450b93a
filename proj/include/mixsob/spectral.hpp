#pragma once

#include <optional>

#include <json.hpp>

#include "mixsob/forms.hpp"

namespace mixsob {

struct EigenOptions {
    double change_tol = 1e-10;     // relative eigenvalue change between sweeps
    double residual_tol = 1e-8;    // ||A phi - lambda phi||_2 / lambda
    int max_iterations = 500;
};

struct EigenResult {
    double lambda = 0.0;
    GridFunction eigenfunction;    // ||.||_2 = 1, mean positive
    double residual = 0.0;         // ||A phi - lambda phi||_2 / lambda
    int iterations = 0;
    bool degenerate = false;       // single-node mask, lambda is the diagonal pairing
};

/// Smallest eigenpair of the chosen form by inverse iteration with
/// preconditioned CG inner solves. Start vector defaults to all ones.
EigenResult first_eigen(const MixedForms& forms, FormPart part, const EigenOptions& options = {},
                        std::optional<GridFunction> start = std::nullopt);

EigenResult first_eigen_fractional(const MixedForms& forms, const EigenOptions& options = {});
EigenResult first_eigen_local(const MixedForms& forms, const EigenOptions& options = {});
EigenResult first_eigen_mixed(const MixedForms& forms, const EigenOptions& options = {});

nlohmann::json to_json(const EigenResult& r);

}  // namespace mixsob
