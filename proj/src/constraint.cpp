#include "gradcon/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cross(const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Vec> convex_hull(std::vector<Vec> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Vec unit(double angle) { return Vec{std::cos(angle), std::sin(angle)}; }

// Lexicographic "smaller" on unit vectors, used to break ties between maximisers.
bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.dim(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

struct Candidate {
    double value = -std::numeric_limits<double>::infinity();
    Vec v;
};

void offer(Candidate& best, double value, const Vec& v) {
    constexpr double tie = 1e-14;
    if (value > best.value + tie * (1.0 + std::abs(value)) ||
        (std::abs(value - best.value) <= tie * (1.0 + std::abs(value)) && lex_less(v, best.v))) {
        best.value = value;
        best.v = v;
    }
}

// max of c . v over the arc of unit vectors between directions a and b (counter-clockwise
// from a to b, spanning less than pi), offered together with its maximiser.
void max_linear_on_arc(Candidate& best, const Vec& c, double offset, const Vec& a, const Vec& b) {
    const double cn = norm(c);
    if (cn > 0.0) {
        const Vec d = c * (1.0 / cn);
        // d lies in the closed arc iff it is counter-clockwise from a and clockwise from b.
        const double ca = a[0] * d[1] - a[1] * d[0];
        const double cb = d[0] * b[1] - d[1] * b[0];
        if (ca >= 0.0 && cb >= 0.0) offer(best, cn + offset, d);
    }
    offer(best, dot(c, a) + offset, a);
    offer(best, dot(c, b) + offset, b);
}

// Outward unit normal of hull edge (hull[k], hull[k+1]), ccw ordering.
Vec edge_normal(const std::vector<Vec>& hull, std::size_t k) {
    const Vec& a = hull[k];
    const Vec& b = hull[(k + 1) % hull.size()];
    Vec nrm{b[1] - a[1], -(b[0] - a[0])};
    return nrm * (1.0 / norm(nrm));
}

// sup_{|v|=1} p.v - l(v) for polyhedral bodies: l is linear (= V_k . v) on the normal cone of
// hull vertex k, which meets the unit circle in the arc between adjacent edge normals.
Candidate polyhedral_maximise(const std::vector<Vec>& hull, const Vec& p) {
    Candidate best;
    if (p.dim() == 1) {
        offer(best, -p[0] + hull.front()[0], Vec{-1.0});
        offer(best, p[0] - hull.back()[0], Vec{1.0});
        return best;
    }
    const std::size_t m = hull.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Vec from = edge_normal(hull, (k + m - 1) % m);
        const Vec to = edge_normal(hull, k);
        max_linear_on_arc(best, p - hull[k], 0.0, from, to);
    }
    return best;
}

// Ellipsoid: sample directions, then golden-section refinement in angle around the best.
Candidate ellipsoid_maximise(const SymMat& shape, const Vec& p, int samples) {
    Candidate best;
    auto objective = [&](const Vec& v) { return dot(p, v) - std::sqrt(inner(shape, SymMat(v[0] * v[0], v[0] * v[1], v[1] * v[1]))); };
    if (p.dim() == 1) {
        const double l = std::sqrt(shape.a11());
        offer(best, -p[0] - l, Vec{-1.0});
        offer(best, p[0] - l, Vec{1.0});
        return best;
    }
    const double step = 2.0 * std::numbers::pi / samples;
    int best_k = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double val = objective(unit(k * step - std::numbers::pi));
        if (val > best_val) {
            best_val = val;
            best_k = k;
        }
    }
    // The objective is smooth on the circle; refine on the bracketing interval.
    double lo = (best_k - 1) * step - std::numbers::pi;
    double hi = (best_k + 1) * step - std::numbers::pi;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = objective(unit(x1)), f2 = objective(unit(x2));
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(unit(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(unit(x1));
        }
    }
    const Vec v = unit(0.5 * (lo + hi));
    offer(best, objective(v), v);
    return best;
}

Vec safe_direction(const Vec& p) {
    const double n = norm(p);
    if (n > 0.0) return p * (1.0 / n);
    // Kink at the origin: every unit vector maximises; choose the lexicographically smallest.
    Vec v(p.dim());
    v[0] = -1.0;
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------

ConvexBody::ConvexBody(Variant body) : body_(std::move(body)) {
    std::visit(Overloaded{
                   [&](const Ball& b) {
                       if (b.dim < 1 || b.dim > kMaxDim) throw InvalidParameter("ball dimension must be 1 or 2");
                       if (!(b.radius > 0.0)) throw DegenerateBody("ball radius must be positive");
                       dim_ = b.dim;
                   },
                   [&](const Box& b) {
                       dim_ = b.halfwidths.dim();
                       if (dim_ < 1) throw InvalidParameter("box needs halfwidths");
                       for (int i = 0; i < dim_; ++i)
                           if (!(b.halfwidths[i] > 0.0)) throw DegenerateBody("box halfwidths must be positive");
                       if (dim_ == 1) {
                           hull_ = {Vec{-b.halfwidths[0]}, Vec{b.halfwidths[0]}};
                       } else {
                           const double w1 = b.halfwidths[0], w2 = b.halfwidths[1];
                           hull_ = {Vec{-w1, -w2}, Vec{w1, -w2}, Vec{w1, w2}, Vec{-w1, w2}};
                       }
                   },
                   [&](const Ellipsoid& e) {
                       dim_ = e.shape.dim();
                       if (dim_ < 1) throw InvalidParameter("ellipsoid needs a shape matrix");
                       if (!(e.shape.min_eigenvalue() > 0.0))
                           throw DegenerateBody("ellipsoid shape must be positive definite");
                   },
                   [&](const Polytope& poly) {
                       if (poly.vertices.empty()) throw InvalidParameter("polytope needs vertices");
                       dim_ = poly.vertices.front().dim();
                       for (const auto& v : poly.vertices) {
                           if (v.dim() != dim_) throw InvalidParameter("polytope vertices differ in dimension");
                           for (int i = 0; i < dim_; ++i)
                               if (!std::isfinite(v[i])) throw InvalidParameter("polytope vertex not finite");
                       }
                       if (static_cast<int>(poly.vertices.size()) < dim_ + 1)
                           throw InvalidParameter("polytope needs at least n+1 vertices");
                       if (dim_ == 1) {
                           auto [lo, hi] = std::minmax_element(poly.vertices.begin(), poly.vertices.end(),
                                                               [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
                           hull_ = {*lo, *hi};
                       } else {
                           hull_ = convex_hull(poly.vertices);
                           if (hull_.size() < 3) throw DegenerateBody("polytope vertices are collinear");
                       }
                   },
               },
               body_);
    if (dim_ < 1 || dim_ > kMaxDim) throw InvalidParameter("only dimensions 1 and 2 are supported");

    // 0 interior <=> l(v) > 0 for all unit v. For polyhedral bodies the minimum of l on the
    // circle is attained at an edge normal, so checking those is exact.
    if (!hull_.empty()) {
        if (dim_ == 1) {
            if (!(hull_.front()[0] < 0.0 && hull_.back()[0] > 0.0))
                throw DegenerateBody("0 is not interior to the interval");
        } else {
            for (std::size_t k = 0; k < hull_.size(); ++k)
                if (!(support_function(*this, edge_normal(hull_, k)) > 0.0))
                    throw DegenerateBody("0 is not interior to the polytope");
        }
    }
}

std::string ConvexBody::name() const {
    return std::visit(Overloaded{[](const Ball&) { return std::string("ball"); },
                                 [](const Box&) { return std::string("box"); },
                                 [](const Ellipsoid&) { return std::string("ellipsoid"); },
                                 [](const Polytope&) { return std::string("polytope"); }},
                      body_);
}

double ConvexBody::circumradius() const {
    return std::visit(Overloaded{[](const Ball& b) { return b.radius; },
                                 [](const Ellipsoid& e) { return std::sqrt(e.shape.max_eigenvalue()); },
                                 [&](const auto&) {
                                     double r = 0.0;
                                     for (const auto& v : hull_) r = std::max(r, norm(v));
                                     return r;
                                 }},
                      body_);
}

double support_function(const ConvexBody& body, const Vec& v) {
    return std::visit(Overloaded{[&](const Ball& b) { return b.radius * norm(v); },
                                 [&](const Box& b) {
                                     double s = 0.0;
                                     for (int i = 0; i < v.dim(); ++i) s += b.halfwidths[i] * std::abs(v[i]);
                                     return s;
                                 },
                                 [&](const Ellipsoid& e) { return std::sqrt(std::max(0.0, dot(e.shape.apply(v), v))); },
                                 [&](const Polytope& poly) {
                                     double s = -std::numeric_limits<double>::infinity();
                                     for (const auto& x : poly.vertices) s = std::max(s, dot(x, v));
                                     return s;
                                 }},
                      body.variant());
}

double sampled_support_constraint(const ConvexBody& body, const Vec& p, int samples) {
    double best = -std::numeric_limits<double>::infinity();
    if (body.dim() == 1) {
        for (double s : {-1.0, 1.0}) best = std::max(best, s * p[0] - support_function(body, Vec{s}));
        return best;
    }
    for (int k = 0; k < samples; ++k) {
        const Vec v = unit(2.0 * std::numbers::pi * k / samples);
        best = std::max(best, dot(p, v) - support_function(body, v));
    }
    return best;
}

// ---------------------------------------------------------------------------

Constraint::Constraint(Kind kind, Provenance prov, double theta, double Theta, std::optional<ConvexBody> body)
    : kind_(std::move(kind)), provenance_(prov), theta_(theta), Theta_(Theta), body_(std::move(body)) {
    dim_ = std::visit(Overloaded{[](const BallNorm& b) { return b.dim; },
                                 [](const BallNormSquared& b) { return b.dim; },
                                 [](const EllipsoidQuadratic& e) { return e.matrix.dim(); },
                                 [](const SupportDerived& s) { return s.body.dim(); }},
                      kind_);
}

Constraint Constraint::ball_norm(int dim, double radius) {
    if (!(radius > 0.0)) throw InvalidParameter("ball_norm radius must be positive");
    if (dim < 1 || dim > kMaxDim) throw InvalidParameter("dimension must be 1 or 2");
    return Constraint(BallNorm{dim, radius}, Provenance::Analytic, 0.0, 0.0, ConvexBody::ball(dim, radius));
}

Constraint Constraint::ball_norm_squared(int dim, double radius) {
    if (!(radius > 0.0)) throw InvalidParameter("ball_norm_squared radius must be positive");
    if (dim < 1 || dim > kMaxDim) throw InvalidParameter("dimension must be 1 or 2");
    return Constraint(BallNormSquared{dim, radius}, Provenance::Analytic, 2.0, 2.0, ConvexBody::ball(dim, radius));
}

Constraint Constraint::ellipsoid_quadratic(const SymMat& a, double level) {
    if (!(level > 0.0)) throw InvalidParameter("ellipsoid_quadratic level must be positive");
    if (a.dim() < 1 || !(a.min_eigenvalue() > 0.0))
        throw InvalidParameter("ellipsoid_quadratic matrix must be positive definite");
    const auto [lo, hi] = a.eigenvalues();
    return Constraint(EllipsoidQuadratic{a, level}, Provenance::Analytic, 2.0 * lo, 2.0 * hi, std::nullopt);
}

double Constraint::value(const Vec& p) const {
    Vec g;
    return value_and_gradient(p, g);
}

Vec Constraint::gradient(const Vec& p) const {
    Vec g;
    value_and_gradient(p, g);
    return g;
}

double Constraint::value_and_gradient(const Vec& p, Vec& grad) const {
    return std::visit(
        Overloaded{
            [&](const BallNorm& b) {
                grad = safe_direction(p);
                return norm(p) - b.radius;
            },
            [&](const BallNormSquared& b) {
                grad = 2.0 * p;
                return dot(p, p) - b.radius * b.radius;
            },
            [&](const EllipsoidQuadratic& e) {
                const Vec ap = e.matrix.apply(p);
                grad = 2.0 * ap;
                return dot(ap, p) - e.level;
            },
            [&](const SupportDerived& s) {
                // Envelope rule: DH(p) is the maximising unit vector.
                const Candidate c = std::visit(
                    Overloaded{[&](const Ball& b) {
                                   Candidate r;
                                   r.v = safe_direction(p);
                                   r.value = norm(p) - b.radius;
                                   return r;
                               },
                               [&](const Ellipsoid& e) { return ellipsoid_maximise(e.shape, p, s.sample_count); },
                               [&](const auto&) { return polyhedral_maximise(s.body.hull(), p); }},
                    s.body.variant());
                grad = c.v;
                return c.value;
            }},
        kind_);
}

std::string Constraint::name() const {
    return std::visit(Overloaded{[](const BallNorm&) { return std::string("ball_norm"); },
                                 [](const BallNormSquared&) { return std::string("ball_norm_squared"); },
                                 [](const EllipsoidQuadratic&) { return std::string("ellipsoid_quadratic"); },
                                 [](const SupportDerived& s) { return "support(" + s.body.name() + ")"; }},
                      kind_);
}

Constraint constraint_from_support(const ConvexBody& body, int sample_count) {
    if (sample_count < 8) throw InvalidParameter("sample_count must be at least 8");
    return Constraint(SupportDerived{body, sample_count}, Provenance::FromSupport, 0.0, 0.0, body);
}

Constraint surrogate(const Constraint& c) {
    return std::visit(
        Overloaded{
            [&](const BallNorm& b) {
                return Constraint(BallNormSquared{b.dim, b.radius}, Provenance::Surrogate, 2.0, 2.0, c.body());
            },
            [&](const BallNormSquared&) { return c; },
            [&](const EllipsoidQuadratic&) { return c; },
            [&](const SupportDerived& s) {
                return std::visit(
                    Overloaded{[&](const Ball& b) {
                                   return Constraint(BallNormSquared{b.dim, b.radius}, Provenance::Surrogate, 2.0, 2.0,
                                                     s.body);
                               },
                               [&](const Ellipsoid& e) {
                                   // K = {S^{-1} p . p <= 1}  ->  G(p) = S^{-1} p . p - 1.
                                   const SymMat a = inverse(e.shape);
                                   const auto [lo, hi] = a.eigenvalues();
                                   return Constraint(EllipsoidQuadratic{a, 1.0}, Provenance::Surrogate, 2.0 * lo,
                                                     2.0 * hi, s.body);
                               },
                               [&](const auto&) -> Constraint {
                                   throw NoSurrogate("no uniformly convex surrogate for " + s.body.name() + " bodies");
                               }},
                    s.body.variant());
            }},
        c.kind());
}

}  // namespace gradcon
