#include "mixsob/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixsob/error.hpp"
#include "mixsob/summation.hpp"

namespace mixsob {

namespace {

constexpr double kMinEdgeFraction = 1e-3;

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Walks all lattice nodes, collecting those accepted by `inside`.
template <typename Inside>
std::vector<std::size_t> collect_interior(const Grid& g, Inside&& inside) {
    std::vector<std::size_t> out;
    std::vector<double> x(g.n);
    const std::size_t total = g.node_count();
    for (std::size_t lin = 0; lin < total; ++lin) {
        auto mi = g.multi_index(lin);
        for (int k = 0; k < g.n; ++k) x[k] = g.coord(mi[k]);
        if (inside(std::span<const double>(x))) out.push_back(lin);
    }
    return out;
}

void check_margin(const Grid& g, const std::vector<std::size_t>& interior) {
    for (std::size_t lin : interior) {
        auto mi = g.multi_index(lin);
        for (int k = 0; k < g.n; ++k)
            require(mi[k] >= 1 && mi[k] <= g.m - 2,
                    "domain leaves no one-node margin inside the bounding box");
    }
}

// Edge fractions from a per-direction boundary-distance callback.
template <typename Distance>
std::vector<double> edge_fractions_for(const Grid& g, const std::vector<std::size_t>& interior,
                                       const std::vector<std::ptrdiff_t>& slot, Distance&& dist) {
    std::vector<double> frac(interior.size() * 2 * g.n, 1.0);
    std::vector<double> x(g.n);
    for (std::size_t s = 0; s < interior.size(); ++s) {
        auto mi = g.multi_index(interior[s]);
        for (int k = 0; k < g.n; ++k) x[k] = g.coord(mi[k]);
        for (int k = 0; k < g.n; ++k) {
            for (int dir = 0; dir < 2; ++dir) {
                const int step = dir == 0 ? -1 : 1;
                auto nb = mi;
                nb[k] += step;
                if (slot[g.linear_index(nb)] >= 0) continue;
                const double t = dist(std::span<const double>(x), k, step);
                frac[s * 2 * g.n + 2 * k + dir] = std::clamp(t / g.h, kMinEdgeFraction, 1.0);
            }
        }
    }
    return frac;
}

std::vector<std::ptrdiff_t> slots_for(const Grid& g, const std::vector<std::size_t>& interior) {
    std::vector<std::ptrdiff_t> slot(g.node_count(), -1);
    for (std::size_t s = 0; s < interior.size(); ++s) slot[interior[s]] = static_cast<std::ptrdiff_t>(s);
    return slot;
}

}  // namespace

std::size_t Grid::node_count() const { return ipow(static_cast<std::size_t>(m), n); }

double Grid::cell_volume() const { return std::pow(h, n); }

std::vector<int> Grid::multi_index(std::size_t linear) const {
    std::vector<int> mi(n);
    for (int k = n - 1; k >= 0; --k) {
        mi[k] = static_cast<int>(linear % m);
        linear /= m;
    }
    return mi;
}

std::size_t Grid::linear_index(std::span<const int> multi) const {
    std::size_t lin = 0;
    for (int k = 0; k < n; ++k) lin = lin * m + static_cast<std::size_t>(multi[k]);
    return lin;
}

Grid build_grid(int n, double L, int m) {
    require(n >= 3, "dimension must be at least 3");
    require(m >= 3 && m % 2 == 1, "nodes per axis must be odd and at least 3");
    require(L > 0.0 && std::isfinite(L), "half width must be positive");
    require(std::pow(static_cast<double>(m), n) < 2e8, "lattice too large");
    return Grid{n, L, m, 2.0 * L / (m - 1)};
}

DomainMask::DomainMask(Grid grid, DomainDescriptor descriptor, std::vector<std::size_t> interior,
                       std::vector<double> edge_fractions)
    : grid_(grid),
      descriptor_(std::move(descriptor)),
      interior_(std::move(interior)),
      edge_fractions_(std::move(edge_fractions)) {
    require(!interior_.empty(), "domain mask has no interior nodes");
    require(std::is_sorted(interior_.begin(), interior_.end()), "interior nodes must be ascending");
    require(edge_fractions_.size() == interior_.size() * 2 * grid_.n, "edge fraction count mismatch");
    check_margin(grid_, interior_);
    slot_ = slots_for(grid_, interior_);
}

std::vector<int> DomainMask::node_multi_index(std::size_t s) const { return grid_.multi_index(interior_[s]); }

std::vector<double> DomainMask::node_point(std::size_t s) const {
    auto mi = node_multi_index(s);
    std::vector<double> x(grid_.n);
    for (int k = 0; k < grid_.n; ++k) x[k] = grid_.coord(mi[k]);
    return x;
}

double DomainMask::measure() const { return static_cast<double>(interior_.size()) * grid_.cell_volume(); }

double DomainMask::interior_diameter() const {
    // Extreme points of the node set have an exterior neighbour.
    std::vector<std::vector<int>> hull;
    for (std::size_t s = 0; s < interior_.size(); ++s) {
        auto mi = node_multi_index(s);
        bool boundary = false;
        for (int k = 0; k < grid_.n && !boundary; ++k) {
            for (int step : {-1, 1}) {
                auto nb = mi;
                nb[k] += step;
                if (slot_[grid_.linear_index(nb)] < 0) boundary = true;
            }
        }
        if (boundary || interior_.size() == 1) hull.push_back(std::move(mi));
    }
    long long best = 0;
    for (std::size_t a = 0; a < hull.size(); ++a) {
        for (std::size_t b = a + 1; b < hull.size(); ++b) {
            long long d2 = 0;
            for (int k = 0; k < grid_.n; ++k) {
                const long long d = hull[a][k] - hull[b][k];
                d2 += d * d;
            }
            best = std::max(best, d2);
        }
    }
    return std::sqrt(static_cast<double>(best)) * grid_.h;
}

double DomainMask::inradius_estimate() const {
    if (const auto* b = std::get_if<BallDomain>(&descriptor_)) return b->radius;
    if (const auto* b = std::get_if<BoxDomain>(&descriptor_))
        return *std::min_element(b->half_widths.begin(), b->half_widths.end());
    // Sampled: largest node-to-exterior distance over interior nodes.
    std::vector<std::vector<int>> exterior;
    for (std::size_t s = 0; s < interior_.size(); ++s) {
        auto mi = node_multi_index(s);
        for (int k = 0; k < grid_.n; ++k) {
            for (int step : {-1, 1}) {
                auto nb = mi;
                nb[k] += step;
                if (slot_[grid_.linear_index(nb)] < 0) exterior.push_back(nb);
            }
        }
    }
    double best = 0.0;
    for (std::size_t s = 0; s < interior_.size(); ++s) {
        auto mi = node_multi_index(s);
        long long nearest = std::numeric_limits<long long>::max();
        for (const auto& e : exterior) {
            long long d2 = 0;
            for (int k = 0; k < grid_.n; ++k) {
                const long long d = mi[k] - e[k];
                d2 += d * d;
            }
            nearest = std::min(nearest, d2);
        }
        best = std::max(best, std::sqrt(static_cast<double>(nearest)) * grid_.h);
    }
    return std::max(best - 0.5 * grid_.h, 0.5 * grid_.h);
}

MaskPtr mask_ball(const Grid& grid, std::vector<double> center, double radius) {
    require(static_cast<int>(center.size()) == grid.n, "ball center has wrong dimension");
    require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
    require(radius >= grid.h, "ball radius is below the lattice spacing");
    for (int k = 0; k < grid.n; ++k)
        require(std::abs(center[k]) + radius <= grid.L - grid.h * (1.0 - 1e-12),
                "ball does not fit inside the box with a one-node margin");
    const double r2 = radius * radius;
    auto inside = [&](std::span<const double> x) {
        double d2 = 0.0;
        for (int k = 0; k < grid.n; ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
        return d2 < r2;
    };
    auto interior = collect_interior(grid, inside);
    require(!interior.empty(), "ball contains no lattice node");
    auto slot = slots_for(grid, interior);
    auto dist = [&](std::span<const double> x, int k, int step) {
        const double a = x[k] - center[k];
        double rest = 0.0;
        for (int j = 0; j < grid.n; ++j)
            if (j != k) rest += (x[j] - center[j]) * (x[j] - center[j]);
        const double b = std::sqrt(std::max(0.0, r2 - rest));
        return step > 0 ? b - a : a + b;
    };
    auto frac = edge_fractions_for(grid, interior, slot, dist);
    return std::make_shared<DomainMask>(grid, BallDomain{std::move(center), radius}, std::move(interior),
                                        std::move(frac));
}

MaskPtr mask_box(const Grid& grid, std::vector<double> half_widths) {
    require(static_cast<int>(half_widths.size()) == grid.n, "box half widths have wrong dimension");
    for (double w : half_widths) {
        require(w > 0.0 && std::isfinite(w), "box half widths must be positive");
        require(w <= grid.L - grid.h * (1.0 - 1e-12), "box does not fit inside the lattice with a one-node margin");
    }
    auto inside = [&](std::span<const double> x) {
        for (int k = 0; k < grid.n; ++k)
            if (!(std::abs(x[k]) < half_widths[k])) return false;
        return true;
    };
    auto interior = collect_interior(grid, inside);
    require(!interior.empty(), "box contains no lattice node");
    auto slot = slots_for(grid, interior);
    auto dist = [&](std::span<const double> x, int k, int step) {
        return step > 0 ? half_widths[k] - x[k] : x[k] + half_widths[k];
    };
    auto frac = edge_fractions_for(grid, interior, slot, dist);
    return std::make_shared<DomainMask>(grid, BoxDomain{std::move(half_widths)}, std::move(interior),
                                        std::move(frac));
}

MaskPtr mask_predicate(const Grid& grid, const PointPredicate& inside, std::string label) {
    auto interior = collect_interior(grid, inside);
    require(!interior.empty(), "predicate selects no lattice node");
    check_margin(grid, interior);
    auto slot = slots_for(grid, interior);
    auto dist = [&](std::span<const double> x, int k, int step) {
        std::vector<double> y(x.begin(), x.end());
        double lo = 0.0, hi = grid.h;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            y[k] = x[k] + step * mid;
            (inside(std::span<const double>(y)) ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto frac = edge_fractions_for(grid, interior, slot, dist);
    return std::make_shared<DomainMask>(grid, SampledDomain{std::move(label)}, std::move(interior),
                                        std::move(frac));
}

bool same_mask(const DomainMask& a, const DomainMask& b) {
    if (&a == &b) return true;
    return a.grid() == b.grid() && std::ranges::equal(a.interior_nodes(), b.interior_nodes()) &&
           std::ranges::equal(a.edge_fractions(), b.edge_fractions());
}

bool same_mask(const MaskPtr& a, const MaskPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return same_mask(*a, *b);
}

GridFunction::GridFunction(MaskPtr mask) : mask_(std::move(mask)) {
    require(mask_ != nullptr, "grid function needs a mask");
    values_.assign(mask_->interior_count(), 0.0);
}

GridFunction::GridFunction(MaskPtr mask, std::vector<double> values)
    : mask_(std::move(mask)), values_(std::move(values)) {
    require(mask_ != nullptr, "grid function needs a mask");
    require(values_.size() == mask_->interior_count(), "value count does not match interior node count");
    for (double v : values_) require(std::isfinite(v), "grid function values must be finite");
}

double GridFunction::at_node(std::size_t linear) const {
    if (linear >= mask_->grid().node_count()) return 0.0;
    const auto s = mask_->slot(linear);
    return s < 0 ? 0.0 : values_[static_cast<std::size_t>(s)];
}

double GridFunction::at(std::span<const int> multi) const {
    const auto& g = mask_->grid();
    if (static_cast<int>(multi.size()) != g.n) return 0.0;
    for (int k : multi)
        if (k < 0 || k >= g.m) return 0.0;
    return at_node(g.linear_index(multi));
}

GridFunction GridFunction::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return GridFunction(mask_, std::move(v));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    require(same_mask(a.mask_, b.mask_), "grid functions live on different masks");
    std::vector<double> v(a.values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.values_[i];
    return GridFunction(a.mask_, std::move(v));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    require(same_mask(a.mask_, b.mask_), "grid functions live on different masks");
    std::vector<double> v(a.values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.values_[i];
    return GridFunction(a.mask_, std::move(v));
}

GridFunction sample(const MaskPtr& mask, const PointFunction& f) {
    std::vector<double> v(mask->interior_count());
    for (std::size_t s = 0; s < v.size(); ++s) {
        auto x = mask->node_point(s);
        v[s] = f(std::span<const double>(x));
        require(std::isfinite(v[s]), "sampled function is not finite at an interior node");
    }
    return GridFunction(mask, std::move(v));
}

double lq_norm(const Grid& grid, std::span<const double> values, double q) {
    require(q >= 1.0 && std::isfinite(q), "Lebesgue exponent must be finite and at least 1");
    CompensatedSum acc;
    if (q == 2.0) {
        for (double v : values) acc.add(v * v);
    } else {
        for (double v : values) acc.add(std::pow(std::abs(v), q));
    }
    return std::pow(acc.value() * grid.cell_volume(), 1.0 / q);
}

double lq_norm(const GridFunction& u, double q) { return lq_norm(u.mask()->grid(), u.values(), q); }

Rational two_star(int n) {
    require(n >= 3, "critical exponent needs n >= 3");
    long long num = 2LL * n, den = n - 2;
    const long long g = std::gcd(num, den);
    return Rational{num / g, den / g};
}

double two_star_value(int n) { return two_star(n).value(); }

namespace {

nlohmann::json descriptor_json(const DomainDescriptor& d) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BallDomain>)
                return {{"type", "ball"}, {"center", v.center}, {"radius", v.radius}};
            else if constexpr (std::is_same_v<T, BoxDomain>)
                return {{"type", "box"}, {"half_widths", v.half_widths}};
            else
                return {{"type", "sampled"}, {"label", v.label}};
        },
        d);
}

}  // namespace

nlohmann::json to_json(const DomainMask& mask) {
    const auto& g = mask.grid();
    std::vector<int> flags(g.node_count(), 0);
    for (std::size_t lin : mask.interior_nodes()) flags[lin] = 1;
    nlohmann::json j = {{"n", g.n}, {"L", g.L}, {"m", g.m}, {"domain", descriptor_json(mask.descriptor())},
                        {"interior", flags}};
    if (std::holds_alternative<SampledDomain>(mask.descriptor()))
        j["edge_fractions"] = std::vector<double>(mask.edge_fractions().begin(), mask.edge_fractions().end());
    return j;
}

nlohmann::json to_json(const GridFunction& u) {
    auto j = to_json(*u.mask());
    const auto& g = u.mask()->grid();
    std::vector<double> full(g.node_count(), 0.0);
    const auto nodes = u.mask()->interior_nodes();
    for (std::size_t s = 0; s < nodes.size(); ++s) full[nodes[s]] = u[s];
    j["values"] = full;
    return j;
}

MaskPtr mask_from_json(const nlohmann::json& j) {
    const Grid g = build_grid(j.at("n").get<int>(), j.at("L").get<double>(), j.at("m").get<int>());
    const auto& d = j.at("domain");
    const auto type = d.at("type").get<std::string>();
    const auto flags = j.at("interior").get<std::vector<int>>();
    require(flags.size() == g.node_count(), "interior flag array has wrong length");
    MaskPtr mask;
    if (type == "ball") {
        mask = mask_ball(g, d.at("center").get<std::vector<double>>(), d.at("radius").get<double>());
    } else if (type == "box") {
        mask = mask_box(g, d.at("half_widths").get<std::vector<double>>());
    } else if (type == "sampled") {
        std::vector<std::size_t> interior;
        for (std::size_t i = 0; i < flags.size(); ++i)
            if (flags[i]) interior.push_back(i);
        auto frac = j.at("edge_fractions").get<std::vector<double>>();
        return std::make_shared<DomainMask>(g, SampledDomain{d.at("label").get<std::string>()}, std::move(interior),
                                            std::move(frac));
    } else {
        throw InvalidArgument("unknown domain type '" + type + "'");
    }
    for (std::size_t i = 0; i < flags.size(); ++i)
        require((flags[i] != 0) == mask->is_interior(i), "interior flags disagree with the domain descriptor");
    return mask;
}

GridFunction grid_function_from_json(const nlohmann::json& j) {
    auto mask = mask_from_json(j);
    const auto full = j.at("values").get<std::vector<double>>();
    require(full.size() == mask->grid().node_count(), "value array has wrong length");
    std::vector<double> v(mask->interior_count());
    const auto nodes = mask->interior_nodes();
    for (std::size_t s = 0; s < nodes.size(); ++s) v[s] = full[nodes[s]];
    for (std::size_t i = 0; i < full.size(); ++i)
        require(mask->is_interior(i) || full[i] == 0.0, "nonzero value outside the domain");
    return GridFunction(mask, std::move(v));
}

}  // namespace mixsob
