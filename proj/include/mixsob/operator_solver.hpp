#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mixsob/forms.hpp"

namespace mixsob {

/// Matrix-free action of one form plus a factored sparse surrogate used to
/// precondition conjugate gradients and gradient flows.
class OperatorSolver {
public:
    OperatorSolver(const MixedForms& forms, FormPart part);
    ~OperatorSolver();
    OperatorSolver(OperatorSolver&&) noexcept;
    OperatorSolver& operator=(OperatorSolver&&) noexcept;

    const MixedForms& forms() const { return *forms_; }
    FormPart part() const { return part_; }
    std::size_t size() const { return forms_->size(); }

    void apply(std::span<const double> u, std::span<double> out) const;
    /// z = P^{-1} r with P the sparse surrogate.
    void precondition(std::span<const double> r, std::span<double> z) const;

    /// Preconditioned CG for A x = b; x carries the initial guess in and the
    /// solution out. Stops at ||b - A x|| <= rel_tol ||b||. Returns the
    /// iteration count; throws ConvergenceError past max_iterations.
    int solve(std::span<const double> b, std::span<double> x, double rel_tol, int max_iterations = 1000) const;

private:
    struct Factor;
    const MixedForms* forms_;
    FormPart part_;
    std::unique_ptr<Factor> factor_;
};

/// sum_i a_i b_i h^n.
double mass_dot(const Grid& grid, std::span<const double> a, std::span<const double> b);

/// Relative weak residual of A u = g: the largest |<A u - g, v>| over
/// (||A u|| + ||g||) ||v|| for `tests` random Gaussian test vectors v.
double weak_residual(const OperatorSolver& op, std::span<const double> u, std::span<const double> g,
                     std::uint64_t seed, int tests = 20);

}  // namespace mixsob
