#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gradcon/elliptic_operator.hpp"
#include "gradcon/linalg.hpp"

namespace gradcon {

/// Uniform tensor grid on a box [lo_1, hi_1] x ... with m_i >= 3 points per axis.
/// Points are numbered with the first axis fastest: idx = i + m_1 j.
class Grid {
public:
    Grid(const Vec& lo, const Vec& hi, const std::array<int, kMaxDim>& points);
    static Grid line(double lo, double hi, int m) { return Grid(Vec{lo}, Vec{hi}, {m, 1}); }
    static Grid square(double lo, double hi, int m) { return Grid(Vec{lo, lo}, Vec{hi, hi}, {m, m}); }

    int dim() const { return dim_; }
    std::size_t size() const { return size_; }
    int points(int axis) const { return m_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    double lower(int axis) const { return lo_[axis]; }
    double upper(int axis) const { return hi_[axis]; }
    double max_spacing() const;
    double cell_volume() const;
    std::size_t stride(int axis) const { return axis == 0 ? 1 : static_cast<std::size_t>(m_[0]); }

    std::array<int, kMaxDim> coords(std::size_t idx) const {
        return {static_cast<int>(idx % m_[0]), static_cast<int>(idx / m_[0])};
    }
    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(m_[0]) * j; }
    Vec point(std::size_t idx) const;
    bool is_boundary(std::size_t idx) const;
    /// Distance from grid point idx to the boundary of the box.
    double distance_to_boundary(std::size_t idx) const;
    const std::vector<std::size_t>& interior() const { return interior_; }
    bool contains(const Vec& x) const;
    /// Strictly inside the open box.
    bool contains_open(const Vec& x) const;
    std::size_t nearest(const Vec& x) const;

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.dim_ == b.dim_ && a.m_ == b.m_ && a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }

private:
    int dim_;
    std::array<double, kMaxDim> lo_{}, hi_{}, h_{};
    std::array<int, kMaxDim> m_{1, 1};
    std::size_t size_;
    std::vector<std::size_t> interior_;
};

using ScalarField = std::function<double(const Vec&)>;

/// Values of a scalar field on a grid together with its Dirichlet data. Boundary entries of
/// values() always equal the Dirichlet data.
class GridFn {
public:
    /// Interior initialised to zero, boundary to phi.
    GridFn(Grid grid, const ScalarField& phi);
    /// Takes boundary data from the boundary entries of `values`.
    GridFn(Grid grid, std::vector<double> values);

    static GridFn sample(const Grid& grid, const ScalarField& f);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t idx) const { return values_[idx]; }
    double boundary_value(std::size_t idx) const { return boundary_[idx]; }

    /// Overwrites interior entries; boundary entries of `v` are ignored.
    void assign_interior(std::span<const double> v);
    void set(std::size_t idx, double v);

private:
    Grid grid_;
    std::vector<double> values_;
    std::vector<double> boundary_;
};

/// Central difference gradient at an interior point.
Vec gradient(const GridFn& u, std::size_t idx);
Vec gradient(const Grid& g, std::span<const double> u, std::size_t idx);

/// Three-point second differences on the diagonal, four-point cross stencil off it.
SymMat hessian(const GridFn& u, std::size_t idx);
SymMat hessian(const Grid& g, std::span<const double> u, std::size_t idx);

/// Multilinear interpolation of grid values at x (clamped into the box).
double interpolate(const Grid& g, std::span<const double> u, const Vec& x);

struct MonotonicityResult {
    bool pass = true;
    std::vector<std::size_t> offending;  // grid indices where some branch violates |a12| <= min(a11, a22)
};

/// Checks the diagonal dominance that keeps the nine-point stencil monotone.
MonotonicityResult monotonicity_check(const EllipticOperator& op, const Grid& g);

}  // namespace gradcon
