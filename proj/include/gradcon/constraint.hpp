#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gradcon/linalg.hpp"

namespace gradcon {

// ---------------------------------------------------------------------------
// Convex bodies
// ---------------------------------------------------------------------------

struct Ball {
    int dim;
    double radius;
};

struct Box {
    Vec halfwidths;
};

/// {p : S^{-1} p . p <= 1} for a symmetric positive-definite shape S.
struct Ellipsoid {
    SymMat shape;
};

/// Convex hull of the listed vertices.
struct Polytope {
    std::vector<Vec> vertices;
};

/// Compact convex set K with 0 in its interior. Immutable once validated.
class ConvexBody {
public:
    using Variant = std::variant<Ball, Box, Ellipsoid, Polytope>;

    /// Throws InvalidParameter on malformed parameters, DegenerateBody if 0 is not interior.
    explicit ConvexBody(Variant body);

    static ConvexBody ball(int dim, double radius) { return ConvexBody(Ball{dim, radius}); }
    static ConvexBody box(const Vec& halfwidths) { return ConvexBody(Box{halfwidths}); }
    static ConvexBody ellipsoid(const SymMat& shape) { return ConvexBody(Ellipsoid{shape}); }
    static ConvexBody polytope(std::vector<Vec> vertices) { return ConvexBody(Polytope{std::move(vertices)}); }

    int dim() const { return dim_; }
    const Variant& variant() const { return body_; }
    std::string name() const;

    /// Extreme points of the body in counter-clockwise order (2D) or {min, max} (1D).
    /// Only defined for Box and Polytope.
    const std::vector<Vec>& hull() const { return hull_; }

    /// max over unit v of l(v), i.e. the largest distance from 0 to a point of K.
    double circumradius() const;

private:
    Variant body_;
    int dim_ = 0;
    std::vector<Vec> hull_;
};

/// l(v) = sup_{p in K} v . p. Positively homogeneous of degree one.
double support_function(const ConvexBody& body, const Vec& v);

// ---------------------------------------------------------------------------
// Gradient constraints H
// ---------------------------------------------------------------------------

enum class Provenance { Analytic, FromSupport, Surrogate };

/// H(p) = |p| - r.
struct BallNorm {
    int dim;
    double radius;
};
/// H(p) = |p|^2 - r^2.
struct BallNormSquared {
    int dim;
    double radius;
};
/// H(p) = A p . p - c.
struct EllipsoidQuadratic {
    SymMat matrix;
    double level;
};
/// H(p) = sup_{|v|=1} { p . v - l(v) } for the support function l of a body.
struct SupportDerived {
    ConvexBody body;
    int sample_count;
};

/// Convex gradient constraint H with gradient, Hessian bounds and provenance.
///
/// theta = 0 means "convex but not uniformly convex". Instances are immutable.
class Constraint {
public:
    using Kind = std::variant<BallNorm, BallNormSquared, EllipsoidQuadratic, SupportDerived>;

    int dim() const { return dim_; }
    double value(const Vec& p) const;
    Vec gradient(const Vec& p) const;
    /// Value and gradient in one evaluation (shares the maximisation for support-derived H).
    double value_and_gradient(const Vec& p, Vec& grad) const;

    double theta() const { return theta_; }
    double Theta() const { return Theta_; }
    Provenance provenance() const { return provenance_; }
    const Kind& kind() const { return kind_; }
    std::string name() const;

    /// Body whose support function prices the singular control, when known.
    const std::optional<ConvexBody>& body() const { return body_; }

    static Constraint ball_norm(int dim, double radius);
    static Constraint ball_norm_squared(int dim, double radius);
    static Constraint ellipsoid_quadratic(const SymMat& a, double level);

private:
    Constraint(Kind kind, Provenance prov, double theta, double Theta, std::optional<ConvexBody> body);

    friend Constraint constraint_from_support(const ConvexBody&, int);
    friend Constraint surrogate(const Constraint&);

    Kind kind_;
    Provenance provenance_;
    double theta_;
    double Theta_;
    std::optional<ConvexBody> body_;
    int dim_;
};

/// H induced by the support function of `body`. Throws DegenerateBody if 0 is not interior.
Constraint constraint_from_support(const ConvexBody& body, int sample_count = 720);

/// Uniformly convex G with {G <= 0} = {H <= 0}. Throws NoSurrogate for box/polytope bodies.
Constraint surrogate(const Constraint& c);

/// Convenience: maximise p.v - l(v) over `samples` equally spaced unit vectors (2D) or
/// both unit vectors (1D). Independent of the closed forms; used as a test oracle.
double sampled_support_constraint(const ConvexBody& body, const Vec& p, int samples);

}  // namespace gradcon
