#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "mixsob/grid.hpp"
#include "mixsob/radial.hpp"

namespace mixsob {

struct FormOptions {
    /// Radius beyond which the exterior is integrated analytically. Zero picks
    /// max(2L, interior diameter + h), which keeps every interior pair inside.
    double tail_radius = 0.0;
    /// Place the Dirichlet zero at the true boundary crossing of each cut
    /// lattice edge instead of at the exterior neighbour.
    bool boundary_fit = true;
    /// Add the lattice-zeta estimate of the omitted near-diagonal Gagliardo
    /// mass, -Z(n+2s-2) h^(2-2s)/n times the Dirichlet energy.
    bool lattice_correction = false;
};

/// Which quadratic form an operator or eigenproblem refers to.
enum class FormPart { local, fractional, mixed };

/// Assembled Dirichlet, Gagliardo and mixed forms for one mask and order s.
///
/// For u vanishing outside Omega the Gagliardo energy splits as
///   sum_{i != j} (u_i - u_j)^2 w_ij  +  2 sum_i u_i^2 kappa_i h^n,
/// with w_ij = h^{2n} |x_i - x_j|^{-(n+2s)} and kappa the exterior
/// confinement potential (lattice sum inside the tail radius plus the
/// analytic far field). The raw kernel is used, without normalization
/// constant. Operator actions are in strong form: <A u, v> h^n equals the
/// bilinear pairing.
class MixedForms {
public:
    MixedForms(MaskPtr mask, double s, FormOptions options = {});

    const MaskPtr& mask() const { return mask_; }
    const Grid& grid() const { return mask_->grid(); }
    std::size_t size() const { return mask_->interior_count(); }
    double s() const { return s_; }
    const FormOptions& options() const { return options_; }
    double tail_radius() const { return tail_radius_; }
    /// Analytic far field sigma_{n-1} / (2s R^{2s}).
    double tail_constant() const { return tail_constant_; }
    double correction_coefficient() const { return correction_; }

    std::span<const double> confinement() const { return kappa_; }
    /// w_ij for interior slots i != j (0 on the diagonal).
    double weight(std::size_t i, std::size_t j) const;
    /// sum_j w_ij.
    std::span<const double> weight_row_sums() const { return row_sums_; }

    double dirichlet_energy(std::span<const double> u) const;
    double interaction_energy(std::span<const double> u) const;
    double confinement_energy(std::span<const double> u) const;
    double gagliardo_energy(std::span<const double> u) const;
    double rho_squared(std::span<const double> u) const;
    double energy(FormPart part, std::span<const double> u) const;

    void apply(FormPart part, std::span<const double> u, std::span<double> out) const;

    /// Strong-form local operator as a sparse matrix.
    Eigen::SparseMatrix<double> local_matrix() const;
    /// Sparse SPD surrogate of the operator: exact diagonal, nearest-neighbour
    /// couplings only. Used as a preconditioner.
    Eigen::SparseMatrix<double> preconditioner_matrix(FormPart part) const;

    /// Cache key: n, L, m, domain hash and s.
    std::string cache_key() const;

private:
    struct Run {
        std::size_t start;             // first interior slot
        std::size_t length;
        std::vector<int> lead;         // all but the last multi-index component
        int last;                      // last-axis index of the first node
    };

    void build_runs();
    void build_weight_table();
    // out_i = sum_j w_ij u_j for every interior slot.
    void weighted_sum(std::span<const double> u, std::span<double> out) const;
    std::size_t lead_offset_base(std::span<const int> a, std::span<const int> b) const;
    void apply_local(std::span<const double> u, std::span<double> out, double scale, bool accumulate) const;

    MaskPtr mask_;
    double s_;
    FormOptions options_;
    double tail_radius_ = 0.0;
    double tail_constant_ = 0.0;
    double correction_ = 0.0;
    std::vector<Run> runs_;
    std::vector<double> reversed_rows_;   // weight table, last axis reversed
    std::vector<double> row_sums_;
    std::vector<double> kappa_;
    std::vector<std::array<std::ptrdiff_t, 16>> neighbours_;  // slot or -1, per direction
};

double dirichlet_energy(const MixedForms& forms, const GridFunction& u);
double gagliardo_energy(const MixedForms& forms, const GridFunction& u);
double rho_squared(const MixedForms& forms, const GridFunction& u);
GridFunction apply_operator(const MixedForms& forms, const GridFunction& u, FormPart part = FormPart::mixed);

/// [u]_s^2 / (||u||_2^2 + ||grad u||_2^2).
double embedding_constant_probe(const MixedForms& forms, const GridFunction& u);

/// Analytic continuation of the Epstein zeta function sum_{z != 0} |z|^{-a}
/// of the cubic lattice Z^n, by Ewald splitting. Valid for 0 < a < n.
double lattice_zeta(int n, double a);

/// Interaction weights as a little-endian float64 upper triangle (row-major,
/// i < j), preceded by a header carrying the cache key.
void write_weight_cache(const MixedForms& forms, const std::filesystem::path& path);
std::vector<double> read_weight_cache(const std::filesystem::path& path, const std::string& expected_key);
/// Upper triangle of w_ij from the assembled forms, same order as the cache.
std::vector<double> weight_triangle(const MixedForms& forms);

std::uint64_t domain_hash(const DomainMask& mask);

}  // namespace mixsob
