#include "mixsob/operator_solver.hpp"

#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "mixsob/error.hpp"

namespace mixsob {

struct OperatorSolver::Factor {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

OperatorSolver::OperatorSolver(const MixedForms& forms, FormPart part)
    : forms_(&forms), part_(part), factor_(std::make_unique<Factor>()) {
    factor_->ldlt.compute(forms.preconditioner_matrix(part));
    if (factor_->ldlt.info() != Eigen::Success) throw ConvergenceError("preconditioner factorization failed");
}

OperatorSolver::~OperatorSolver() = default;
OperatorSolver::OperatorSolver(OperatorSolver&&) noexcept = default;
OperatorSolver& OperatorSolver::operator=(OperatorSolver&&) noexcept = default;

void OperatorSolver::apply(std::span<const double> u, std::span<double> out) const { forms_->apply(part_, u, out); }

void OperatorSolver::precondition(std::span<const double> r, std::span<double> z) const {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = factor_->ldlt.solve(rv);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

int OperatorSolver::solve(std::span<const double> b, std::span<double> x, double rel_tol, int max_iterations) const {
    const std::size_t N = size();
    require(b.size() == N && x.size() == N, "right-hand side does not match the operator");
    std::vector<double> r(N), z(N), p(N), Ap(N);
    apply(x, Ap);
    for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - Ap[i];
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return 0;
    }
    const double target = rel_tol * bnorm;
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= target) return 0;
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        apply(p, Ap);
        const double alpha = rz / dot(p, Ap);
        for (std::size_t i = 0; i < N; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) return it;
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
    }
    throw ConvergenceError("conjugate gradients did not converge", rnorm / bnorm);
}

double mass_dot(const Grid& grid, std::span<const double> a, std::span<const double> b) {
    return dot(a, b) * grid.cell_volume();
}

double weak_residual(const OperatorSolver& op, std::span<const double> u, std::span<const double> g,
                     std::uint64_t seed, int tests) {
    const std::size_t N = op.size();
    std::vector<double> Au(N), r(N), v(N);
    op.apply(u, Au);
    for (std::size_t i = 0; i < N; ++i) r[i] = Au[i] - g[i];
    const double scale = std::sqrt(dot(Au, Au)) + std::sqrt(dot(g, g));
    if (scale == 0.0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int t = 0; t < tests; ++t) {
        for (auto& x : v) x = nd(rng);
        worst = std::max(worst, std::abs(dot(r, v)) / (scale * std::sqrt(dot(v, v))));
    }
    return worst;
}

}  // namespace mixsob
