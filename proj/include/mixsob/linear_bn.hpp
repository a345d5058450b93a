#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsob/flow.hpp"
#include "mixsob/forms.hpp"
#include "mixsob/spectral.hpp"

namespace mixsob {

/// rho(u)^2 - lambda ||u||_2^2, not normalized.
double q_lambda(const MixedForms& forms, const GridFunction& u, double lambda);

struct Minimization {
    double value = 0.0;            // inf of Q_lambda over the unit 2*-sphere
    GridFunction minimizer;        // nonnegative, ||.||_{2*} = 1
    int iterations = 0;
    bool converged = false;
};

/// Normalized gradient flow for Q_lambda, started from `start` or, when it is
/// absent, from the first mixed eigenfunction.
Minimization minimize_s_lambda(const MixedForms& forms, double lambda, const FlowOptions& options = {},
                               std::optional<GridFunction> start = std::nullopt);

enum class Regime { plateau, window, supercritical };
std::string to_string(Regime r);

struct CurveOptions {
    FlowOptions flow;
    double plateau_tol = 0.0;      // <= 0 means 2% of the Talenti constant
    bool keep_minimizers = false;
    /// Plateau level to measure against; the value at the smallest lambda
    /// when absent.
    std::optional<double> plateau_reference;
};

struct CurveSample {
    double lambda = 0.0;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    Regime regime = Regime::plateau;
};

struct QuotientCurve {
    std::vector<CurveSample> samples;
    std::vector<GridFunction> minimizers;   // parallel to samples when kept
    double lambda_1s = 0.0;        // fractional first eigenvalue
    double lambda_1 = 0.0;         // mixed first eigenvalue
    double plateau = 0.0;
    double plateau_tol = 0.0;
    std::optional<double> lambda_star;      // largest sample still on the plateau
    std::optional<double> zero_crossing;    // sign change, linearly interpolated
    double max_increase = 0.0;     // worst violation of monotonicity
    double max_jump = 0.0;         // largest |S(l_i+1) - S(l_i)|
    double lipschitz_bound = 0.0;  // max (l_i+1 - l_i) |Omega|^(2/n), by Hoelder
};

/// S_n(lambda) on an ascending grid. Each sample keeps the better of a warm
/// start from the previous minimizer and a restart from the eigenfunction.
QuotientCurve trace_curve(const MixedForms& forms, const std::vector<double>& lambdas, const CurveOptions& options = {});

/// Equally spaced grid on (0, factor * lambda_1].
std::vector<double> lambda_grid(double lambda_1, int samples, double factor = 1.2);

struct BNSolution {
    GridFunction u;
    double lambda = 0.0;
    double residual = 0.0;         // relative weak residual of A u = lambda u + u^(2*-1)
    double identity_error = 0.0;   // |rho^2 - lambda ||u||_2^2 - ||u||_{2*}^{2*}| relative
    double min_value = 0.0;
    double max_value = 0.0;
    double positive_fraction = 0.0;
};

/// u = value^((n-2)/4) w for a minimizer w of S_n(lambda). Throws
/// InvalidArgument when value <= 0.
BNSolution extract_solution(double value, const GridFunction& minimizer, const MixedForms& forms, double lambda,
                            std::uint64_t seed = 1);

/// Weak residual of the Lagrange equation A w = lambda w + value w^(2*-1)
/// satisfied by a normalized minimizer; defined for every sign of value.
double stationarity_residual(const MixedForms& forms, const GridFunction& w, double lambda, double value,
                             std::uint64_t seed = 1);

/// ||u||_{2*} <= S_n^((n-2)/4).
bool small_ball_check(const GridFunction& u);

nlohmann::json to_json(const QuotientCurve& c);
nlohmann::json to_json(const BNSolution& s);

}  // namespace mixsob
