#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mixsob {

/// Uniform lattice on the box [-L, L]^n with m nodes per axis.
///
/// m is odd so the origin is a node. Node coordinates are x_i = -L + i*h
/// componentwise, h = 2L/(m-1); linear indices are row-major (last axis
/// fastest).
struct Grid {
    int n = 3;
    double L = 1.0;
    int m = 3;
    double h = 1.0;

    std::size_t node_count() const;
    double coord(int i) const { return -L + i * h; }
    double cell_volume() const;
    std::vector<int> multi_index(std::size_t linear) const;
    std::size_t linear_index(std::span<const int> multi) const;

    friend bool operator==(const Grid&, const Grid&) = default;
};

Grid build_grid(int n, double L, int m);

struct BallDomain {
    std::vector<double> center;
    double radius = 1.0;
};

/// Axis-aligned box centered at the origin.
struct BoxDomain {
    std::vector<double> half_widths;
};

/// Domain given only through a membership predicate.
struct SampledDomain {
    std::string label;
};

using DomainDescriptor = std::variant<BallDomain, BoxDomain, SampledDomain>;

/// Interior-node mask encoding an open set Omega on a Grid.
///
/// Values at every node outside the mask (and off the lattice) are the
/// implicit zero extension. Each interior node also carries, for each of the
/// 2n axis directions, the fraction theta in (0, 1] of the lattice edge that
/// lies inside Omega (1 when the neighbour is interior). Direction index is
/// 2*axis + (step > 0).
class DomainMask {
public:
    DomainMask(Grid grid, DomainDescriptor descriptor, std::vector<std::size_t> interior,
               std::vector<double> edge_fractions);

    const Grid& grid() const { return grid_; }
    const DomainDescriptor& descriptor() const { return descriptor_; }

    std::size_t interior_count() const { return interior_.size(); }
    /// Lattice linear indices of interior nodes, ascending.
    std::span<const std::size_t> interior_nodes() const { return interior_; }
    bool is_interior(std::size_t linear) const { return slot_[linear] >= 0; }
    /// Position of a lattice node in the interior ordering, -1 if exterior.
    std::ptrdiff_t slot(std::size_t linear) const { return slot_[linear]; }

    std::span<const double> edge_fractions() const { return edge_fractions_; }
    double edge_fraction(std::size_t slot, int direction) const {
        return edge_fractions_[slot * 2 * grid_.n + direction];
    }

    std::vector<int> node_multi_index(std::size_t slot) const;
    std::vector<double> node_point(std::size_t slot) const;

    /// |Omega| by node counting.
    double measure() const;
    /// Largest distance between two interior nodes.
    double interior_diameter() const;
    /// Distance from the interior node set to the complement, bounded below
    /// by half a cell; used to size cut-off radii.
    double inradius_estimate() const;

private:
    Grid grid_;
    DomainDescriptor descriptor_;
    std::vector<std::size_t> interior_;
    std::vector<std::ptrdiff_t> slot_;
    std::vector<double> edge_fractions_;
};

using MaskPtr = std::shared_ptr<const DomainMask>;

/// Nodes with |x - center| < radius. The radius must be at least h, and the
/// ball plus one node of margin must fit inside the box.
MaskPtr mask_ball(const Grid& grid, std::vector<double> center, double radius);

/// Nodes with |x_k| < half_widths[k] for all k; half widths must not exceed L - h.
MaskPtr mask_box(const Grid& grid, std::vector<double> half_widths);

using PointPredicate = std::function<bool(std::span<const double>)>;

/// Nodes where inside(x) holds. Edge fractions are located by bisection.
MaskPtr mask_predicate(const Grid& grid, const PointPredicate& inside, std::string label);

/// Same lattice, same interior set and same edge fractions.
bool same_mask(const DomainMask& a, const DomainMask& b);
bool same_mask(const MaskPtr& a, const MaskPtr& b);

/// Values on interior nodes of a mask; zero everywhere else.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(MaskPtr mask);
    GridFunction(MaskPtr mask, std::vector<double> values);

    const MaskPtr& mask() const { return mask_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t slot) const { return values_[slot]; }

    /// Value at a lattice node; exactly 0 outside the mask.
    double at_node(std::size_t linear) const;
    double at(std::span<const int> multi) const;

    GridFunction scaled(double c) const;
    friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b);

private:
    MaskPtr mask_;
    std::vector<double> values_;
};

using PointFunction = std::function<double(std::span<const double>)>;

GridFunction sample(const MaskPtr& mask, const PointFunction& f);

/// (sum_i |u_i|^q h^n)^(1/q).
double lq_norm(const GridFunction& u, double q);
double lq_norm(const Grid& grid, std::span<const double> values, double q);

struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Critical Sobolev exponent 2n/(n-2), reduced.
Rational two_star(int n);
double two_star_value(int n);

/// JSON form {n, L, m, domain, interior, values}; values are the full
/// row-major lattice array with zeros outside the mask.
nlohmann::json to_json(const DomainMask& mask);
nlohmann::json to_json(const GridFunction& u);
MaskPtr mask_from_json(const nlohmann::json& j);
GridFunction grid_function_from_json(const nlohmann::json& j);

}  // namespace mixsob
