#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixsob/flow.hpp"
#include "mixsob/forms.hpp"
#include "mixsob/radial.hpp"
#include "mixsob/regression.hpp"

namespace mixsob {

/// Best constant S_n in S_n ||u||_{2*}^2 <= ||grad u||_2^2:
/// pi n (n-2) (Gamma(n/2) / Gamma(n))^(2/n).
double talenti_constant(int n);

/// 1/(n (n-2) pi) (Gamma(n) / Gamma(n/2))^(2/n), the closed form as it is
/// often quoted. It is the reciprocal of talenti_constant, kept so the
/// relation stays checked rather than silently assumed.
double reciprocal_talenti_formula(int n);

/// ||grad U||^2 / ||U||_{2*}^2 of the Aubin-Talenti shape by quadrature.
double aubin_talenti_quotient(int n);

/// U_{t,x0}(x) = t^((n-2)/2) U(t (x - x0)) with U normalized in L^{2*}.
struct AubinTalenti {
    RadialProfile profile;
    double normalization = 1.0;    // c in U(z) = c (1 + |z|^2)^((2-n)/2)
    double t = 1.0;
    std::vector<double> center;

    double operator()(std::span<const double> x) const;
};

AubinTalenti aubin_talenti(int n, double t, std::vector<double> center = {});

enum class ScanMode { shrink_k, spread_t };

struct ConcentrationSample {
    double parameter = 0.0;
    double quotient = 0.0;         // rho^2 / ||.||_{2*}^2, +inf when divergent
    double excess = 0.0;           // quotient minus its k-independent or limiting part
    double gagliardo = 0.0;        // fractional contribution to the quotient
    bool finite = true;
};

struct ConcentrationReport {
    ScanMode mode = ScanMode::spread_t;
    int n = 3;
    double s = 0.5;
    std::vector<ConcentrationSample> samples;
    double limit_estimate = 0.0;
    std::optional<LogLogFit> fit;  // excess against the parameter
    bool monotone = false;         // quotients decrease toward the limit
    bool above_talenti = false;    // every quotient strictly above S_n
    bool divergent = false;        // the fractional seminorm is infinite
    std::string note;
};

/// Spread mode: rho(U_{t,0})^2 for t in t_values by radial quadrature. When
/// [U]_s is infinite every sample is reported as divergent and no fit exists.
ConcentrationReport spread_scan(int n, double s, const std::vector<double>& t_values);

/// Shrink mode: node values of `base` on a ball of the given radius carried
/// to grids shrunk by each k with the u_k = k^((n-2)/2) u(k x) scaling.
ConcentrationReport shrink_scan(int n, double L, int m, double radius, double s, const PointFunction& base,
                                const std::vector<double>& k_values);

struct SharpConstantEstimate {
    double value = 0.0;
    GridFunction minimizer;
    std::vector<double> value_history;
    std::vector<double> participation_history;
    double participation_drop = 0.0;   // 1 - final / initial participation ratio
    bool first_step_decreased = false;
    int iterations = 0;
};

/// Minimizes rho^2 over the discrete unit 2*-sphere starting from the
/// constant function.
SharpConstantEstimate estimate_sharp_constant(const MixedForms& forms, const FlowOptions& options = {});

}  // namespace mixsob
