#include "gradcon/grid.hpp"

#include <algorithm>
#include <cmath>

#include "gradcon/errors.hpp"

namespace gradcon {

Grid::Grid(const Vec& lo, const Vec& hi, const std::array<int, kMaxDim>& points) : dim_(lo.dim()) {
    if (dim_ < 1 || dim_ > kMaxDim || hi.dim() != dim_) throw InvalidParameter("grid bounds must have dimension 1 or 2");
    size_ = 1;
    for (int a = 0; a < dim_; ++a) {
        if (points[a] < 3) throw InvalidParameter("grid needs at least 3 points per axis");
        if (!(hi[a] > lo[a])) throw InvalidParameter("grid upper bound must exceed lower bound");
        lo_[a] = lo[a];
        hi_[a] = hi[a];
        m_[a] = points[a];
        h_[a] = (hi[a] - lo[a]) / (points[a] - 1);
        size_ *= static_cast<std::size_t>(points[a]);
    }
    for (std::size_t idx = 0; idx < size_; ++idx)
        if (!is_boundary(idx)) interior_.push_back(idx);
}

double Grid::max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < dim_; ++a) h = std::max(h, h_[a]);
    return h;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= h_[a];
    return v;
}

Vec Grid::point(std::size_t idx) const {
    const auto c = coords(idx);
    Vec x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = c[a] == m_[a] - 1 ? hi_[a] : lo_[a] + c[a] * h_[a];
    return x;
}

bool Grid::is_boundary(std::size_t idx) const {
    const auto c = coords(idx);
    for (int a = 0; a < dim_; ++a)
        if (c[a] == 0 || c[a] == m_[a] - 1) return true;
    return false;
}

double Grid::distance_to_boundary(std::size_t idx) const {
    const Vec x = point(idx);
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim_; ++a) d = std::min({d, x[a] - lo_[a], hi_[a] - x[a]});
    return d;
}

bool Grid::contains(const Vec& x) const {
    for (int a = 0; a < dim_; ++a)
        if (x[a] < lo_[a] || x[a] > hi_[a]) return false;
    return true;
}

bool Grid::contains_open(const Vec& x) const {
    for (int a = 0; a < dim_; ++a)
        if (x[a] <= lo_[a] || x[a] >= hi_[a]) return false;
    return true;
}

std::size_t Grid::nearest(const Vec& x) const {
    std::array<int, kMaxDim> c{0, 0};
    for (int a = 0; a < dim_; ++a)
        c[a] = std::clamp(static_cast<int>(std::lround((x[a] - lo_[a]) / h_[a])), 0, m_[a] - 1);
    return index(c[0], c[1]);
}

// ---------------------------------------------------------------------------

GridFn::GridFn(Grid grid, const ScalarField& phi)
    : grid_(std::move(grid)), values_(grid_.size(), 0.0), boundary_(grid_.size(), 0.0) {
    for (std::size_t idx = 0; idx < grid_.size(); ++idx)
        if (grid_.is_boundary(idx)) values_[idx] = boundary_[idx] = phi(grid_.point(idx));
}

GridFn::GridFn(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)), boundary_(grid_.size(), 0.0) {
    if (values_.size() != grid_.size()) throw InvalidParameter("grid function size does not match grid");
    for (std::size_t idx = 0; idx < grid_.size(); ++idx)
        if (grid_.is_boundary(idx)) boundary_[idx] = values_[idx];
}

GridFn GridFn::sample(const Grid& grid, const ScalarField& f) {
    std::vector<double> v(grid.size());
    for (std::size_t idx = 0; idx < grid.size(); ++idx) v[idx] = f(grid.point(idx));
    return GridFn(grid, std::move(v));
}

void GridFn::assign_interior(std::span<const double> v) {
    for (std::size_t idx : grid_.interior()) values_[idx] = v[idx];
}

void GridFn::set(std::size_t idx, double v) {
    if (grid_.is_boundary(idx)) throw InvalidParameter("boundary values are fixed by the Dirichlet data");
    values_[idx] = v;
}

// ---------------------------------------------------------------------------

Vec gradient(const Grid& g, std::span<const double> u, std::size_t idx) {
    Vec p(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        const std::size_t s = g.stride(a);
        p[a] = (u[idx + s] - u[idx - s]) / (2.0 * g.spacing(a));
    }
    return p;
}

Vec gradient(const GridFn& u, std::size_t idx) { return gradient(u.grid(), u.values(), idx); }

SymMat hessian(const Grid& g, std::span<const double> u, std::size_t idx) {
    const double h1 = g.spacing(0);
    const double uxx = (u[idx + 1] - 2.0 * u[idx] + u[idx - 1]) / (h1 * h1);
    if (g.dim() == 1) return SymMat(uxx);
    const std::size_t s = g.stride(1);
    const double h2 = g.spacing(1);
    const double uyy = (u[idx + s] - 2.0 * u[idx] + u[idx - s]) / (h2 * h2);
    const double uxy = (u[idx + s + 1] + u[idx - s - 1] - u[idx - s + 1] - u[idx + s - 1]) / (4.0 * h1 * h2);
    return SymMat(uxx, uxy, uyy);
}

SymMat hessian(const GridFn& u, std::size_t idx) { return hessian(u.grid(), u.values(), idx); }

double interpolate(const Grid& g, std::span<const double> u, const Vec& x) {
    std::array<int, kMaxDim> c{0, 0};
    std::array<double, kMaxDim> t{0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) {
        const double s = std::clamp((x[a] - g.lower(a)) / g.spacing(a), 0.0, static_cast<double>(g.points(a) - 1));
        c[a] = std::min(static_cast<int>(s), g.points(a) - 2);
        t[a] = s - c[a];
    }
    if (g.dim() == 1) return (1.0 - t[0]) * u[c[0]] + t[0] * u[c[0] + 1];
    const std::size_t i00 = g.index(c[0], c[1]);
    const std::size_t s = g.stride(1);
    return (1.0 - t[0]) * (1.0 - t[1]) * u[i00] + t[0] * (1.0 - t[1]) * u[i00 + 1] +
           (1.0 - t[0]) * t[1] * u[i00 + s] + t[0] * t[1] * u[i00 + s + 1];
}

MonotonicityResult monotonicity_check(const EllipticOperator& op, const Grid& g) {
    MonotonicityResult r;
    if (g.dim() == 1) return r;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec x = g.point(idx);
        for (int k = 0; k < op.branch_count(); ++k) {
            const SymMat a = op.coefficient(k, x);
            if (std::abs(a.a12()) > std::min(a.a11(), a.a22())) {
                r.pass = false;
                r.offending.push_back(idx);
                break;
            }
        }
    }
    return r;
}

}  // namespace gradcon
