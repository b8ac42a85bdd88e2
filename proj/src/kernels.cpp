#include "gradcon/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gradcon/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gradcon {

namespace {

// Branch value -a_k . M, maximised over k; returns the winning index.
inline int best_branch(const SymMat* a, int branches, const SymMat& m, double& value) {
    int best_k = 0;
    value = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < branches; ++k) {
        const double v = -inner(a[k], m);
        if (v > value) {
            value = v;
            best_k = k;
        }
    }
    return best_k;
}

inline double backward(const Grid& g, std::span<const double> u, std::size_t idx, int axis) {
    return (u[idx] - u[idx - g.stride(axis)]) / g.spacing(axis);
}

inline double forward(const Grid& g, std::span<const double> u, std::size_t idx, int axis) {
    return (u[idx + g.stride(axis)] - u[idx]) / g.spacing(axis);
}

// Upwind weights with a dead zone: a sign of dH/dp_a that does not survive every corner of the
// rounding box of the central difference is noise and the axis stays central.
void upwind_weights(const Grid& g, std::span<const double> u, std::size_t idx, const Constraint& c, const Vec& pc,
                    double* w) {
    const int d = g.dim();
    Vec delta(d);
    for (int a = 0; a < d; ++a) {
        const std::size_t s = g.stride(a);
        delta[a] = 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(u[idx - s]) + std::abs(u[idx + s])) /
                   (2.0 * g.spacing(a));
    }
    const Vec dh = c.gradient(pc);
    std::array<int, kMaxDim> sign{};
    for (int a = 0; a < d; ++a) sign[a] = dh[a] > 0.0 ? 1 : (dh[a] < 0.0 ? -1 : 0);
    for (int corner = 0; corner < (1 << d); ++corner) {
        Vec q = pc;
        for (int a = 0; a < d; ++a) q[a] += (corner >> a & 1) ? delta[a] : -delta[a];
        const Vec dq = c.gradient(q);
        for (int a = 0; a < d; ++a)
            if ((sign[a] > 0 && !(dq[a] > 0.0)) || (sign[a] < 0 && !(dq[a] < 0.0))) sign[a] = 0;
    }
    for (int a = 0; a < d; ++a) w[a] = sign[a] > 0 ? 1.0 : (sign[a] < 0 ? 0.0 : 0.5);
}

inline void weights_at(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx, double* w) {
    const Grid& g = *sys.grid;
    const int d = g.dim();
    if (!sys.weights.empty()) {
        for (int a = 0; a < d; ++a) w[a] = sys.weights[idx * d + a];
        return;
    }
    for (int a = 0; a < d; ++a) w[a] = 0.5;
    if (sys.scheme == GradientScheme::Upwind) upwind_weights(g, u, idx, *sys.constraint, gradient(g, u, idx), w);
}

// p_a = w D^-_a u + (1 - w) D^+_a u; w = 1/2 uses the central quotient directly.
inline Vec weighted_gradient(const Grid& g, std::span<const double> u, std::size_t idx, const double* w) {
    Vec p(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        if (w[a] == 0.5) {
            const std::size_t s = g.stride(a);
            p[a] = (u[idx + s] - u[idx - s]) / (2.0 * g.spacing(a));
        } else if (w[a] == 1.0) {
            p[a] = backward(g, u, idx, a);
        } else if (w[a] == 0.0) {
            p[a] = forward(g, u, idx, a);
        } else {
            p[a] = w[a] * backward(g, u, idx, a) + (1.0 - w[a]) * forward(g, u, idx, a);
        }
    }
    return p;
}

inline Vec system_gradient(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx,
                           std::array<double, kMaxDim>& w) {
    weights_at(sys, u, idx, w.data());
    return weighted_gradient(*sys.grid, u, idx, w.data());
}

template <class Body>
void for_interior(const Grid& g, Exec exec, Body&& body) {
    const auto& interior = g.interior();
    const auto n = static_cast<std::ptrdiff_t>(interior.size());
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(interior[i]);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(interior[i]);
}

inline double residual_at(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx) {
    const Grid& g = *sys.grid;
    double fval = 0.0;
    best_branch(&sys.coefficients[idx * sys.branches], sys.branches, hessian(g, u, idx), fval);
    double pen = 0.0;
    if (sys.penalty) {
        std::array<double, kMaxDim> w{};
        pen = (*sys.penalty)(sys.constraint->value(system_gradient(sys, u, idx, w)));
    }
    return fval + pen - sys.source[idx];
}

inline void jacobian_row(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx, int k,
                         std::array<double, JacobianRows::kSlots>& row) {
    const Grid& g = *sys.grid;
    row.fill(0.0);
    // dF = L : D^2 delta with L = -a_k.
    const SymMat a = sys.coefficients[idx * sys.branches + k];
    const double h1 = g.spacing(0);
    const double cxx = -a.a11() / (h1 * h1);
    row[0] += -2.0 * cxx;
    row[1] += cxx;
    row[2] += cxx;
    if (g.dim() == 2) {
        const double h2 = g.spacing(1);
        const double cyy = -a.a22() / (h2 * h2);
        row[0] += -2.0 * cyy;
        row[3] += cyy;
        row[4] += cyy;
        // 2 L12 delta_xy with the four-point cross stencil.
        const double cxy = 2.0 * (-a.a12()) / (4.0 * h1 * h2);
        row[5] += cxy;
        row[8] += cxy;
        row[6] -= cxy;
        row[7] -= cxy;
    }
    if (sys.penalty) {
        Vec dh;
        std::array<double, kMaxDim> w{};
        const Vec p = system_gradient(sys, u, idx, w);
        const double bprime = sys.penalty->deriv(sys.constraint->value_and_gradient(p, dh));
        if (bprime != 0.0) {
            for (int ax = 0; ax < g.dim(); ++ax) {
                // dp_a/du on (minus, centre, plus) = (-w, 2w - 1, 1 - w) / h.
                const double b = bprime * dh[ax] / g.spacing(ax);
                row[1 + 2 * ax] -= b * w[ax];
                row[0] += b * (2.0 * w[ax] - 1.0);
                row[2 + 2 * ax] += b * (1.0 - w[ax]);
            }
        }
    }
    // Dirichlet neighbours carry no unknown.
    const auto off = stencil_offsets(g);
    for (int s = 1; s < JacobianRows::kSlots; ++s) {
        if (g.dim() == 1 && s > 2) break;
        if (g.is_boundary(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off[s]))) row[s] = 0.0;
    }
}

}  // namespace

const char* to_string(GradientScheme s) {
    switch (s) {
        case GradientScheme::Central:
            return "central";
        case GradientScheme::Upwind:
            return "upwind";
    }
    return "unknown";
}

GradientScheme parse_gradient_scheme(const std::string& name) {
    if (name == "central") return GradientScheme::Central;
    if (name == "upwind") return GradientScheme::Upwind;
    throw InvalidParameter("unknown gradient scheme '" + name + "' (expected central or upwind)");
}

Vec penalty_gradient(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx) {
    std::array<double, kMaxDim> w{};
    return system_gradient(sys, u, idx, w);
}

int parallel_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<SymMat> sample_coefficients(const EllipticOperator& op, const Grid& g) {
    const int nb = op.branch_count();
    std::vector<SymMat> c(g.size() * nb);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec x = g.point(idx);
        for (int k = 0; k < nb; ++k) c[idx * nb + k] = op.coefficient(k, x);
    }
    return c;
}

std::array<std::ptrdiff_t, JacobianRows::kSlots> stencil_offsets(const Grid& g) {
    const auto s = static_cast<std::ptrdiff_t>(g.stride(1));
    if (g.dim() == 1) return {0, -1, 1, 0, 0, 0, 0, 0, 0};
    return {0, -1, 1, -s, s, -s - 1, -s + 1, s - 1, s + 1};
}

void penalized_residual(const PenalizedSystem& sys, std::span<const double> u, std::span<double> r, Exec exec) {
    std::fill(r.begin(), r.end(), 0.0);
    for_interior(*sys.grid, exec, [&](std::size_t idx) { r[idx] = residual_at(sys, u, idx); });
}

void select_branches(const PenalizedSystem& sys, std::span<const double> u, std::span<int> branch, Exec exec) {
    std::fill(branch.begin(), branch.end(), 0);
    for_interior(*sys.grid, exec, [&](std::size_t idx) {
        double v;
        branch[idx] = best_branch(&sys.coefficients[idx * sys.branches], sys.branches, hessian(*sys.grid, u, idx), v);
    });
}

void select_weights(const PenalizedSystem& sys, std::span<const double> u, std::span<double> weights, Exec exec) {
    std::fill(weights.begin(), weights.end(), 0.5);
    PenalizedSystem derive = sys;
    derive.weights = {};
    const int d = sys.grid->dim();
    for_interior(*sys.grid, exec, [&](std::size_t idx) { weights_at(derive, u, idx, &weights[idx * d]); });
}

void assemble_jacobian(const PenalizedSystem& sys, std::span<const double> u, std::span<const int> branch,
                       JacobianRows& rows, Exec exec) {
    rows.values.resize(sys.grid->size());
    for_interior(*sys.grid, exec, [&](std::size_t idx) { jacobian_row(sys, u, idx, branch[idx], rows.values[idx]); });
}

double max_abs(std::span<const double> v, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    double m = 0.0;
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
#pragma omp parallel for reduction(max : m) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

}  // namespace gradcon
