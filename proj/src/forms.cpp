#include "mixsob/forms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "mixsob/error.hpp"
#include "mixsob/parallel.hpp"
#include "mixsob/summation.hpp"

namespace mixsob {

namespace {

constexpr char kCacheMagic[8] = {'M', 'X', 'S', 'B', 'W', 'G', 'T', '1'};

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

double lattice_zeta(int n, double a) {
    require(n >= 1 && a > 0.0 && a < n, "lattice zeta continuation needs 0 < a < n");
    const double pi = std::numbers::pi;
    const int K = 6;
    const double b = 0.5 * (n - a);
    CompensatedSum acc;
    std::vector<int> z(n, -K);
    for (;;) {
        long long r2 = 0;
        for (int v : z) r2 += static_cast<long long>(v) * v;
        if (r2 > 0 && r2 <= static_cast<long long>(K) * K) {
            const double x = pi * static_cast<double>(r2);
            acc.add(std::pow(x, -0.5 * a) * boost::math::tgamma(0.5 * a, x));
            acc.add(std::pow(x, -b) * boost::math::tgamma(b, x));
        }
        int k = 0;
        while (k < n && ++z[k] > K) z[k++] = -K;
        if (k == n) break;
    }
    acc.add(-2.0 / (n - a));
    acc.add(-2.0 / a);
    return acc.value() * std::pow(pi, 0.5 * a) / std::tgamma(0.5 * a);
}

MixedForms::MixedForms(MaskPtr mask, double s, FormOptions options)
    : mask_(std::move(mask)), s_(s), options_(options) {
    require(mask_ != nullptr && mask_->interior_count() > 0, "forms need a nonempty mask");
    require(s > 0.0 && s < 1.0, "fractional order must lie in (0, 1)");
    const Grid& g = grid();
    const int n = g.n;
    require(n <= 8, "dimension above 8 is not supported");

    const double diameter = mask_->interior_diameter();
    tail_radius_ = options_.tail_radius > 0.0 ? options_.tail_radius : std::max(2.0 * g.L, diameter + g.h);
    tail_constant_ = sphere_area(n) / (2.0 * s_ * std::pow(tail_radius_, 2.0 * s_));
    if (options_.lattice_correction)
        correction_ = -lattice_zeta(n, n + 2.0 * s_ - 2.0) * std::pow(g.h, 2.0 - 2.0 * s_) / n;

    // Axis neighbours.
    const std::size_t N = size();
    neighbours_.assign(N, {});
    for (std::size_t i = 0; i < N; ++i) {
        auto mi = mask_->node_multi_index(i);
        for (int k = 0; k < n; ++k) {
            for (int dir = 0; dir < 2; ++dir) {
                auto nb = mi;
                nb[k] += dir == 0 ? -1 : 1;
                neighbours_[i][2 * k + dir] = mask_->slot(g.linear_index(nb));
            }
        }
    }

    build_runs();
    build_weight_table();

    row_sums_.assign(N, 0.0);
    std::vector<double> ones(N, 1.0);
    weighted_sum(ones, row_sums_);

    // Lattice sum of |hz|^{-(n+2s)} over 0 < |hz| < R.
    const double expo = n + 2.0 * s_;
    const int K = static_cast<int>(std::floor(tail_radius_ / g.h));
    CompensatedSum lattice_total;
    {
        std::vector<int> z(n, -K);
        for (;;) {
            long long r2 = 0;
            for (int v : z) r2 += static_cast<long long>(v) * v;
            const double r = g.h * std::sqrt(static_cast<double>(r2));
            if (r2 > 0 && r < tail_radius_) lattice_total.add(std::pow(r, -expo));
            int k = 0;
            while (k < n && ++z[k] > K) z[k++] = -K;
            if (k == n) break;
        }
    }
    const double vol = g.cell_volume();
    kappa_.assign(N, 0.0);
    if (diameter < tail_radius_) {
        // Every interior pair lies inside the tail radius.
        const double inv_h2n = 1.0 / (vol * vol);
        for (std::size_t i = 0; i < N; ++i)
            kappa_[i] = vol * (lattice_total.value() - row_sums_[i] * inv_h2n) + tail_constant_;
    } else {
        std::vector<std::vector<int>> pts(N);
        for (std::size_t i = 0; i < N; ++i) pts[i] = mask_->node_multi_index(i);
        parallel_for(N, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                CompensatedSum inner;
                for (std::size_t j = 0; j < N; ++j) {
                    if (j == i) continue;
                    long long r2 = 0;
                    for (int k = 0; k < n; ++k) {
                        const long long d = pts[i][k] - pts[j][k];
                        r2 += d * d;
                    }
                    const double r = g.h * std::sqrt(static_cast<double>(r2));
                    if (r < tail_radius_) inner.add(std::pow(r, -expo));
                }
                kappa_[i] = vol * (lattice_total.value() - inner.value()) + tail_constant_;
            }
        });
    }
    for (double k : kappa_) require(k >= 0.0, "negative confinement potential; lattice too coarse for tail radius");
}

void MixedForms::build_runs() {
    const Grid& g = grid();
    const auto nodes = mask_->interior_nodes();
    runs_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto mi = g.multi_index(nodes[i]);
        const int last = mi.back();
        mi.pop_back();
        if (!runs_.empty()) {
            Run& r = runs_.back();
            if (r.lead == mi && r.last + static_cast<int>(r.length) == last) {
                ++r.length;
                continue;
            }
        }
        runs_.push_back(Run{i, 1, std::move(mi), last});
    }
}

void MixedForms::build_weight_table() {
    const Grid& g = grid();
    const int n = g.n;
    const int S = 2 * g.m - 1;
    const double coeff = std::pow(g.h, n - 2.0 * s_);
    const double expo = 0.5 * (n + 2.0 * s_);
    reversed_rows_.assign(ipow(S, n), 0.0);
    std::vector<int> z(n, 0);
    const std::size_t total = reversed_rows_.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int k = n - 1; k >= 0; --k) {
            z[k] = static_cast<int>(rem % S) - (g.m - 1);
            rem /= S;
        }
        // Position idx stores last-axis offset (m-1) - t'.
        z[n - 1] = -z[n - 1];
        long long r2 = 0;
        for (int v : z) r2 += static_cast<long long>(v) * v;
        reversed_rows_[idx] = r2 == 0 ? 0.0 : coeff * std::pow(static_cast<double>(r2), -expo);
    }
}

std::size_t MixedForms::lead_offset_base(std::span<const int> a, std::span<const int> b) const {
    const int S = 2 * grid().m - 1;
    std::size_t base = 0;
    for (std::size_t k = 0; k < a.size(); ++k) base = base * S + static_cast<std::size_t>(a[k] - b[k] + grid().m - 1);
    return base * S;
}

void MixedForms::weighted_sum(std::span<const double> u, std::span<double> out) const {
    const int m1 = grid().m - 1;
    parallel_for(runs_.size(), [&](std::size_t rb, std::size_t re) {
        for (std::size_t ra = rb; ra < re; ++ra) {
            const Run& a = runs_[ra];
            for (std::size_t p = 0; p < a.length; ++p) out[a.start + p] = 0.0;
            for (const Run& b : runs_) {
                const double* row = reversed_rows_.data() + lead_offset_base(a.lead, b.lead) + (m1 - (a.last - b.last));
                const double* ub = u.data() + b.start;
                for (std::size_t p = 0; p < a.length; ++p) {
                    const double* w = row - p;
                    double acc = 0.0;
                    for (std::size_t q = 0; q < b.length; ++q) acc += w[q] * ub[q];
                    out[a.start + p] += acc;
                }
            }
        }
    });
}

double MixedForms::weight(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    const Grid& g = grid();
    auto a = mask_->node_multi_index(i);
    auto b = mask_->node_multi_index(j);
    const int m1 = g.m - 1;
    const int la = a.back(), lb = b.back();
    a.pop_back();
    b.pop_back();
    return reversed_rows_[lead_offset_base(a, b) + static_cast<std::size_t>(m1 - (la - lb))];
}

double MixedForms::dirichlet_energy(std::span<const double> u) const {
    require(u.size() == size(), "function does not match the forms' mask");
    const Grid& g = grid();
    const int dirs = 2 * g.n;
    CompensatedSum acc;
    for (std::size_t i = 0; i < size(); ++i) {
        for (int d = 0; d < dirs; ++d) {
            const auto j = neighbours_[i][d];
            if (j >= 0) {
                // Each interior edge once, from its lower endpoint.
                if (d % 2 == 1) {
                    const double diff = u[i] - u[static_cast<std::size_t>(j)];
                    acc.add(diff * diff);
                }
            } else {
                const double theta = options_.boundary_fit ? mask_->edge_fraction(i, d) : 1.0;
                acc.add(u[i] * u[i] / theta);
            }
        }
    }
    return acc.value() * std::pow(g.h, g.n - 2);
}

double MixedForms::interaction_energy(std::span<const double> u) const {
    require(u.size() == size(), "function does not match the forms' mask");
    const int m1 = grid().m - 1;
    std::vector<double> partial(runs_.size(), 0.0);
    parallel_for(runs_.size(), [&](std::size_t rb, std::size_t re) {
        for (std::size_t ra = rb; ra < re; ++ra) {
            const Run& a = runs_[ra];
            CompensatedSum acc;
            for (const Run& b : runs_) {
                const double* row = reversed_rows_.data() + lead_offset_base(a.lead, b.lead) + (m1 - (a.last - b.last));
                const double* ub = u.data() + b.start;
                for (std::size_t p = 0; p < a.length; ++p) {
                    const double* w = row - p;
                    const double ua = u[a.start + p];
                    double blk = 0.0;
                    for (std::size_t q = 0; q < b.length; ++q) {
                        const double d = ua - ub[q];
                        blk += w[q] * d * d;
                    }
                    acc.add(blk);
                }
            }
            partial[ra] = acc.value();
        }
    });
    CompensatedSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

double MixedForms::confinement_energy(std::span<const double> u) const {
    require(u.size() == size(), "function does not match the forms' mask");
    CompensatedSum acc;
    for (std::size_t i = 0; i < size(); ++i) acc.add(u[i] * u[i] * kappa_[i]);
    return 2.0 * acc.value() * grid().cell_volume();
}

double MixedForms::gagliardo_energy(std::span<const double> u) const {
    double e = interaction_energy(u) + confinement_energy(u);
    if (correction_ != 0.0) e += correction_ * dirichlet_energy(u);
    return e;
}

double MixedForms::rho_squared(std::span<const double> u) const { return dirichlet_energy(u) + gagliardo_energy(u); }

double MixedForms::energy(FormPart part, std::span<const double> u) const {
    switch (part) {
        case FormPart::local: return dirichlet_energy(u);
        case FormPart::fractional: return gagliardo_energy(u);
        case FormPart::mixed: return rho_squared(u);
    }
    return 0.0;
}

void MixedForms::apply_local(std::span<const double> u, std::span<double> out, double scale, bool accumulate) const {
    const Grid& g = grid();
    const int dirs = 2 * g.n;
    const double c = scale / (g.h * g.h);
    for (std::size_t i = 0; i < size(); ++i) {
        double acc = 0.0;
        for (int d = 0; d < dirs; ++d) {
            const auto j = neighbours_[i][d];
            if (j >= 0)
                acc += u[i] - u[static_cast<std::size_t>(j)];
            else
                acc += u[i] / (options_.boundary_fit ? mask_->edge_fraction(i, d) : 1.0);
        }
        out[i] = (accumulate ? out[i] : 0.0) + c * acc;
    }
}

void MixedForms::apply(FormPart part, std::span<const double> u, std::span<double> out) const {
    require(u.size() == size() && out.size() == size(), "vector does not match the forms' mask");
    if (part == FormPart::local) {
        apply_local(u, out, 1.0, false);
        return;
    }
    std::vector<double> wu(size());
    weighted_sum(u, wu);
    const double inv_vol = 1.0 / grid().cell_volume();
    for (std::size_t i = 0; i < size(); ++i)
        out[i] = 2.0 * inv_vol * (row_sums_[i] * u[i] - wu[i]) + 2.0 * kappa_[i] * u[i];
    const double local_scale = (part == FormPart::mixed ? 1.0 : 0.0) + correction_;
    if (local_scale != 0.0) apply_local(u, out, local_scale, true);
}

Eigen::SparseMatrix<double> MixedForms::local_matrix() const {
    const Grid& g = grid();
    const int dirs = 2 * g.n;
    const double c = 1.0 / (g.h * g.h);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size() * (dirs + 1));
    for (std::size_t i = 0; i < size(); ++i) {
        double diag = 0.0;
        for (int d = 0; d < dirs; ++d) {
            const auto j = neighbours_[i][d];
            if (j >= 0) {
                diag += c;
                trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -c);
            } else {
                diag += c / (options_.boundary_fit ? mask_->edge_fraction(i, d) : 1.0);
            }
        }
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(size()), static_cast<int>(size()));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

Eigen::SparseMatrix<double> MixedForms::preconditioner_matrix(FormPart part) const {
    const Grid& g = grid();
    const int dirs = 2 * g.n;
    if (part == FormPart::local) return local_matrix();
    const double inv_vol = 1.0 / g.cell_volume();
    const double w1 = std::pow(g.h, g.n - 2.0 * s_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size() * (dirs + 1));
    for (std::size_t i = 0; i < size(); ++i) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 2.0 * inv_vol * row_sums_[i] + 2.0 * kappa_[i]);
        for (int d = 0; d < dirs; ++d) {
            const auto j = neighbours_[i][d];
            if (j >= 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -2.0 * inv_vol * w1);
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(size()), static_cast<int>(size()));
    A.setFromTriplets(trip.begin(), trip.end());
    const double local_scale = (part == FormPart::mixed ? 1.0 : 0.0) + correction_;
    if (local_scale != 0.0) A += local_scale * local_matrix();
    return A;
}

std::uint64_t domain_hash(const DomainMask& mask) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (std::size_t lin : mask.interior_nodes()) {
        const std::uint64_t v = lin;
        mix(&v, sizeof v);
    }
    for (double f : mask.edge_fractions()) mix(&f, sizeof f);
    return h;
}

std::string MixedForms::cache_key() const {
    std::ostringstream os;
    os.precision(17);
    const Grid& g = grid();
    os << "n=" << g.n << ";L=" << g.L << ";m=" << g.m << ";domain=" << std::hex << domain_hash(*mask_) << std::dec
       << ";s=" << s_;
    return os.str();
}

std::vector<double> weight_triangle(const MixedForms& forms) {
    const std::size_t N = forms.size();
    std::vector<double> tri;
    tri.reserve(N * (N - 1) / 2);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) tri.push_back(forms.weight(i, j));
    return tri;
}

namespace {

void write_le_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_le_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
    return v;
}

}  // namespace

void write_weight_cache(const MixedForms& forms, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "cannot open weight cache for writing: " + path.string());
    const std::string key = forms.cache_key();
    os.write(kCacheMagic, sizeof kCacheMagic);
    write_le_u64(os, key.size());
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    const auto tri = weight_triangle(forms);
    write_le_u64(os, tri.size());
    for (double w : tri) write_le_u64(os, std::bit_cast<std::uint64_t>(w));
}

std::vector<double> read_weight_cache(const std::filesystem::path& path, const std::string& expected_key) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "cannot open weight cache: " + path.string());
    char magic[8];
    is.read(magic, 8);
    require(is && std::memcmp(magic, kCacheMagic, 8) == 0, "not a weight cache file");
    const auto klen = read_le_u64(is);
    require(klen < 4096, "corrupt weight cache header");
    std::string key(klen, '\0');
    is.read(key.data(), static_cast<std::streamsize>(klen));
    require(key == expected_key, "weight cache key mismatch");
    const auto count = read_le_u64(is);
    std::vector<double> tri(count);
    for (auto& w : tri) w = std::bit_cast<double>(read_le_u64(is));
    require(static_cast<bool>(is), "truncated weight cache");
    return tri;
}

double dirichlet_energy(const MixedForms& forms, const GridFunction& u) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    return forms.dirichlet_energy(u.values());
}

double gagliardo_energy(const MixedForms& forms, const GridFunction& u) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    return forms.gagliardo_energy(u.values());
}

double rho_squared(const MixedForms& forms, const GridFunction& u) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    return forms.rho_squared(u.values());
}

GridFunction apply_operator(const MixedForms& forms, const GridFunction& u, FormPart part) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    std::vector<double> out(forms.size());
    forms.apply(part, u.values(), out);
    return GridFunction(forms.mask(), std::move(out));
}

double embedding_constant_probe(const MixedForms& forms, const GridFunction& u) {
    require(same_mask(forms.mask(), u.mask()), "function lives on a different mask");
    const double l2 = lq_norm(u, 2.0);
    const double grad = forms.dirichlet_energy(u.values());
    require(l2 > 0.0, "embedding probe needs a nonzero function");
    return forms.gagliardo_energy(u.values()) / (l2 * l2 + grad);
}

}  // namespace mixsob
