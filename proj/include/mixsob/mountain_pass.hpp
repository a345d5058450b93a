#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsob/forms.hpp"
#include "mixsob/linear_bn.hpp"
#include "mixsob/radial.hpp"
#include "mixsob/regression.hpp"

namespace mixsob {

struct Exponents {
    double s = 0.5;
    int n = 3;
    double p = 2.0;
    double kappa = 0.0;   // min(2 - 2s, n - 2)
    double beta = 0.0;    // n - (p + 1)(n - 2)/2
    double N = 0.0;       // n - (n - 2)(p + 1)
    bool case1 = false;   // kappa > beta; ties go to case 2
};

/// Throws InvalidArgument unless 1 < p < 2* - 1 and 0 < s < 1.
Exponents exponents(double s, int n, double p);

/// eta_eps = phi_r U_eps / ||phi_r U_eps||_{2*} with its path coefficients.
struct Competitor {
    RadialProfile profile;
    double eps = 0.0;
    double r = 0.0;
    double s = 0.0;
    double gradient = 0.0;    // ||grad eta||^2
    double gagliardo = 0.0;   // [eta]_s^2
    double A = 0.0;           // rho(eta)^2
    double B = 0.0;           // ||eta||_{2*}^{2*}
    bool expansion_warning = false;   // eps >= r/4
};

Competitor competitor(double eps, double r, double s, int n);
/// C = ||eta||_{p+1}^{p+1}.
double competitor_lp(const Competitor& c, double p);

struct PathMax {
    double t_star = 0.0;
    double value = 0.0;
};

/// max over t >= 0 of g(t) = t^2 A/2 - t^{2*}/2* - lambda C t^(p+1)/(p+1):
/// golden section on [0, A^(1/(2*-2))], then Newton on g'.
PathMax sup_over_path(double A, double C, double lambda, double p, int n);

/// S_n^(n/2) / n.
double threshold(int n);

struct PathReport {
    double eps = 0.0;
    double r = 0.0;
    double lambda = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double t_star = 0.0;
    double sup = 0.0;
    double threshold = 0.0;
    bool below = false;       // sup < threshold
};

struct DichotomyOptions {
    double r = 0.5;
    double lambda_max = 1e12;         // case-2 search ceiling
    double bisection_tol = 1e-3;      // relative, on lambda
    int discard_largest = 2;          // pre-asymptotic eps dropped from fits
};

struct DichotomyReport {
    Exponents exps;
    std::vector<Competitor> competitors;
    std::vector<PathReport> reports;          // every (eps, lambda) pair
    std::vector<double> lambdas;
    /// Case 1: largest eps with sup < threshold for each sampled lambda.
    std::vector<std::optional<double>> witness_eps;
    bool all_witnessed = false;
    /// Case 2: lambda_0 at the eps minimizing it, bracketed to bisection_tol.
    std::optional<double> lambda0;
    double lambda0_eps = 0.0;
    double sup_below_lambda0 = 0.0;           // >= threshold
    double sup_above_lambda0 = 0.0;           // < threshold
    bool verdict_flips = false;
    std::optional<LogLogFit> kappa_fit;       // A - S_n against eps
    std::optional<LogLogFit> beta_fit;        // C against eps
    std::string note;
};

DichotomyReport dichotomy_scan(double s, int n, double p, const std::vector<double>& eps_grid,
                               const std::vector<double>& lambdas, const DichotomyOptions& options = {});
/// Same scan over competitors already computed (A does not depend on p).
DichotomyReport dichotomy_scan(std::vector<Competitor> competitors, double p, const std::vector<double>& lambdas,
                               const DichotomyOptions& options = {});
/// Competitors for every eps, largest eps first.
std::vector<Competitor> competitor_sweep(double s, int n, const std::vector<double>& eps_grid, double r);

/// Dyadic grid 2^-k for k = k_first, k_first + step, ..., k_last.
std::vector<double> dyadic_grid(int k_first, int k_last, int step = 1);

/// 1/2 rho^2 - 1/2* sum (u+)^{2*} h^n - lambda/(p+1) sum (u+)^(p+1) h^n.
double j_energy(const MixedForms& forms, const GridFunction& u, double lambda, double p);
/// The same with |u| in place of u+.
double f_energy(const MixedForms& forms, const GridFunction& u, double lambda, double p);

struct GeometryProbe {
    double alpha = 0.0;             // rim radius in the rho norm
    double beta_level = 0.0;        // analytic lower bound of J on the rim
    double rim_min = 0.0;           // smallest J over the battery at rho = alpha
    double rim_min_half = 0.0;      // same at rho = alpha/2
    double bound_half = 0.0;        // analytic lower bound at alpha/2
    int battery = 0;
    int violations = 0;             // battery members below beta_level
    GridFunction e;                 // far point, rho(e) > alpha, J(e) < beta_level
    double rho_e = 0.0;
    double j_e = 0.0;
};

/// Mountain-pass geometry: a rim {rho = alpha} on which J >= beta_level for
/// a random battery, and a scaled competitor beyond it with J below.
/// Embedding constants are S' = 0.9 S_n for the discrete Sobolev quotient
/// and Hoelder for the L^(p+1) term.
GeometryProbe mp_geometry_probe(const MixedForms& forms, double lambda, double p, std::uint64_t seed = 1,
                                int battery = 200);

struct SuperlinearOptions {
    int max_iterations = 4000;
    double value_tol = 1e-13;
    int patience = 8;
    double step_floor = 1e-14;
    std::uint64_t seed = 1;
};

struct SuperlinearResult {
    BNSolution solution;            // residual of A u = lambda u^p + u^(2*-1)
    double energy = 0.0;            // J(u)
    double level = 0.0;             // max_t J(t w) at the returned direction
    int iterations = 0;
    bool converged = false;
};

/// Minimizes w -> max_t J(t w) over nonnegative w on the unit 2*-sphere,
/// seeded by the sampled competitor; u = t* w is the critical point.
SuperlinearResult solve_superlinear(const MixedForms& forms, double lambda, double p,
                                    const SuperlinearOptions& options = {});

nlohmann::json to_json(const Exponents& e);
nlohmann::json to_json(const PathReport& r);
nlohmann::json to_json(const DichotomyReport& r);

}  // namespace mixsob
