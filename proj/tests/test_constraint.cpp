#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "gradcon/constraint.hpp"
#include "gradcon/errors.hpp"

using namespace gradcon;

namespace {

// max over n equally spaced unit vectors of p.v - l(v), with l itself brute-forced from the
// body's extreme points (or boundary samples for smooth bodies).
double brute_force_h(const std::vector<Vec>& boundary, const Vec& p, int n) {
    double best = -1e300;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        const Vec v{std::cos(t), std::sin(t)};
        double l = -1e300;
        for (const Vec& q : boundary) l = std::max(l, dot(v, q));
        best = std::max(best, dot(p, v) - l);
    }
    return best;
}

std::vector<Vec> circle_points(double r, int n) {
    std::vector<Vec> pts;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        pts.push_back(Vec{r * std::cos(t), r * std::sin(t)});
    }
    return pts;
}

Vec random_vec(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return Vec{d(rng), d(rng)};
}

std::vector<ConvexBody> sample_bodies() {
    return {ConvexBody::ball(2, 1.5), ConvexBody::box(Vec{1.0, 0.5}), ConvexBody::ellipsoid(SymMat(0.25, 0.05, 0.09)),
            ConvexBody::polytope({Vec{1.0, 0.0}, Vec{-0.5, 0.8}, Vec{-0.4, -0.9}, Vec{0.6, -0.6}})};
}

}  // namespace

TEST_SUITE("constraint") {
    TEST_CASE("support function of the unit ball at a unit vector is one") {
        CHECK(support_function(ConvexBody::ball(2, 1.0), Vec{0.0, 1.0}) == doctest::Approx(1.0));
    }

    TEST_CASE("box support function matches the best vertex") {
        const Vec v{1.0, -2.0};
        double best = -1e300;
        for (double s1 : {-1.0, 1.0})
            for (double s2 : {-1.0, 1.0}) best = std::max(best, dot(v, Vec{s1, s2}));
        CHECK(best == 3.0);
        CHECK(support_function(ConvexBody::box(Vec{1.0, 1.0}), v) == doctest::Approx(best).epsilon(1e-15));
    }

    TEST_CASE("support function vanishes at v = 0") {
        for (const ConvexBody& b : sample_bodies()) CHECK(support_function(b, Vec{0.0, 0.0}) == 0.0);
    }

    TEST_CASE("ellipsoid support function agrees with boundary sampling") {
        const SymMat s(0.25, 0.05, 0.09);
        const SymMat root = psd_sqrt(s);
        std::vector<Vec> boundary;
        for (const Vec& w : circle_points(1.0, 20000)) boundary.push_back(root.apply(w));
        const ConvexBody body = ConvexBody::ellipsoid(s);
        std::mt19937_64 rng(7);
        for (int i = 0; i < 50; ++i) {
            const Vec v = random_vec(rng, 2.0);
            double brute = -1e300;
            for (const Vec& q : boundary) brute = std::max(brute, dot(v, q));
            CHECK(support_function(body, v) == doctest::Approx(brute).epsilon(1e-6));
        }
    }

    TEST_CASE("ball-induced H at (1.2, 1.6) is 1 and agrees with sampled maximisation") {
        const Constraint h = constraint_from_support(ConvexBody::ball(2, 1.0));
        const Vec p{1.2, 1.6};
        const double oracle = brute_force_h(circle_points(1.0, 2000), p, 10000);
        CHECK(oracle == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(h.value(p) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("ball-induced H at 0 is -r") {
        CHECK(constraint_from_support(ConvexBody::ball(2, 0.7)).value(Vec{0.0, 0.0}) == doctest::Approx(-0.7));
    }

    TEST_CASE("box-induced H at (2, 0) is 1 with maximiser (1, 0)") {
        const std::vector<Vec> corners{Vec{1, 1}, Vec{-1, 1}, Vec{-1, -1}, Vec{1, -1}};
        const Vec p{2.0, 0.0};
        const double oracle = brute_force_h(corners, p, 10000);
        CHECK(oracle == doctest::Approx(1.0).epsilon(1e-12));
        const Constraint h = constraint_from_support(ConvexBody::box(Vec{1.0, 1.0}));
        CHECK(h.value(p) == doctest::Approx(1.0).epsilon(1e-12));
        const Vec g = h.gradient(p);
        CHECK(g[0] == doctest::Approx(1.0));
        CHECK(g[1] == doctest::Approx(0.0));
    }

    TEST_CASE("support-derived H matches brute force on every body") {
        std::mt19937_64 rng(11);
        for (const ConvexBody& b : sample_bodies()) {
            if (b.hull().empty()) {
                const Constraint h = constraint_from_support(b, 720);
                for (int i = 0; i < 30; ++i) {
                    const Vec p = random_vec(rng, 3.0);
                    // p.v - l(v) over sampled v
                    double brute = -1e300;
                    for (const Vec& w : circle_points(1.0, 20000)) brute = std::max(brute, dot(p, w) - support_function(b, w));
                    CHECK(h.value(p) == doctest::Approx(brute).epsilon(1e-7));
                }
            } else {
                const Constraint h = constraint_from_support(b);
                for (int i = 0; i < 30; ++i) {
                    const Vec p = random_vec(rng, 3.0);
                    // The sampled maximum is below the exact one by at most Lip(v -> p.v - l(v)) times
                    // half the angular step.
                    const double brute = brute_force_h(b.hull(), p, 20000);
                    CHECK(h.value(p) >= brute - 1e-12);
                    CHECK(h.value(p) <= brute + (norm(p) + b.circumradius()) * std::numbers::pi / 20000);
                }
            }
        }
    }

    TEST_CASE("analytic constraints at their examples") {
        CHECK(Constraint::ball_norm_squared(2, 1.0).value(Vec{0.6, 0.8}) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(Constraint::ball_norm(2, 1.0).value(Vec{0.0, 0.0}) == -1.0);
        CHECK(Constraint::ellipsoid_quadratic(SymMat(1.0, 0.0, 4.0), 1.0).value(Vec{1.0, 0.0}) == 0.0);
        const Constraint q = Constraint::ball_norm_squared(2, 1.0);
        CHECK(q.theta() == 2.0);
        CHECK(q.Theta() == 2.0);
        CHECK(Constraint::ball_norm(2, 1.0).theta() == 0.0);
        const Constraint e = Constraint::ellipsoid_quadratic(SymMat(1.0, 0.0, 4.0), 1.0);
        CHECK(e.theta() == doctest::Approx(2.0));
        CHECK(e.Theta() == doctest::Approx(8.0));
    }

    TEST_CASE("invalid analytic parameters are rejected") {
        CHECK_THROWS_AS(Constraint::ball_norm(2, 0.0), InvalidParameter);
        CHECK_THROWS_AS(Constraint::ball_norm_squared(2, -1.0), InvalidParameter);
        CHECK_THROWS_AS(Constraint::ellipsoid_quadratic(SymMat(1.0, 0.0, -1.0), 1.0), InvalidParameter);
        CHECK_THROWS_AS(Constraint::ellipsoid_quadratic(SymMat(1.0, 0.0, 1.0), 0.0), InvalidParameter);
    }

    TEST_CASE("bodies without the origin in their interior are degenerate") {
        CHECK_THROWS_AS(ConvexBody::polytope({Vec{0.1, 0.1}, Vec{1.0, 0.1}, Vec{0.1, 1.0}}), DegenerateBody);
        CHECK_THROWS_AS(ConvexBody::polytope({Vec{0.0, 0.0}, Vec{1.0, 0.0}, Vec{0.0, 1.0}}), DegenerateBody);
        CHECK_THROWS_AS(ConvexBody::ball(2, 0.0), DegenerateBody);
    }

    TEST_CASE("surrogates") {
        const Constraint s = surrogate(Constraint::ball_norm(2, 1.0));
        CHECK(std::holds_alternative<BallNormSquared>(s.kind()));
        CHECK(std::get<BallNormSquared>(s.kind()).radius == 1.0);

        const Constraint same = surrogate(Constraint::ball_norm_squared(2, 1.3));
        CHECK(std::get<BallNormSquared>(same.kind()).radius == 1.3);

        CHECK_THROWS_AS(surrogate(constraint_from_support(ConvexBody::box(Vec{1.0, 1.0}))), NoSurrogate);
        CHECK_THROWS_AS(surrogate(constraint_from_support(ConvexBody::polytope({Vec{1, 0}, Vec{-1, 1}, Vec{-1, -1}}))),
                        NoSurrogate);
    }

    TEST_CASE("ellipsoid surrogate agrees in sign on 10^4 samples") {
        const ConvexBody body = ConvexBody::ellipsoid(SymMat(0.25, 0.05, 0.09));
        const Constraint h = constraint_from_support(body);
        const Constraint g = surrogate(h);
        CHECK(g.theta() > 0.0);
        std::mt19937_64 rng(3);
        const double r = 3.0 * body.circumradius();
        int disagreements = 0;
        for (int i = 0; i < 10000; ++i) {
            const Vec p = random_vec(rng, r);
            if (norm(p) > r) continue;
            const double hv = h.value(p);
            if (std::abs(hv) > 1e-9 && (hv > 0.0) != (g.value(p) > 0.0)) ++disagreements;
        }
        CHECK(disagreements == 0);
    }

    TEST_CASE("support function is homogeneous and subadditive on 10^4 samples") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> t(0.0, 5.0);
        for (const ConvexBody& b : sample_bodies()) {
            for (int i = 0; i < 2500; ++i) {
                const Vec v = random_vec(rng, 2.0), w = random_vec(rng, 2.0);
                const double s = t(rng);
                const double lv = support_function(b, v);
                CHECK(support_function(b, s * v) == doctest::Approx(s * lv).epsilon(1e-12));
                CHECK(support_function(b, v + w) <= lv + support_function(b, w) + 1e-12);
            }
        }
    }

    TEST_CASE("every constraint is convex with H(0) < 0") {
        std::mt19937_64 rng(9);
        std::vector<Constraint> cs{Constraint::ball_norm(2, 1.0), Constraint::ball_norm_squared(2, 0.8),
                                   Constraint::ellipsoid_quadratic(SymMat(2.0, 0.3, 1.0), 0.5)};
        for (const ConvexBody& b : sample_bodies()) cs.push_back(constraint_from_support(b));
        for (const Constraint& c : cs) {
            CHECK(c.value(Vec{0.0, 0.0}) < 0.0);
            for (int i = 0; i < 1000; ++i) {
                const Vec p = random_vec(rng, 3.0), q = random_vec(rng, 3.0);
                CHECK(c.value(0.5 * (p + q)) <= 0.5 * (c.value(p) + c.value(q)) + 1e-12);
            }
        }
    }

    TEST_CASE("uniformly convex constraints satisfy the coercivity triple on 10^3 samples") {
        std::mt19937_64 rng(13);
        std::vector<Constraint> cs{Constraint::ball_norm_squared(2, 1.0),
                                   Constraint::ellipsoid_quadratic(SymMat(2.0, 0.3, 1.0), 0.5),
                                   surrogate(constraint_from_support(ConvexBody::ellipsoid(SymMat(0.25, 0.05, 0.09))))};
        for (const Constraint& c : cs) {
            REQUIRE(c.theta() > 0.0);
            const Vec zero{0.0, 0.0};
            const double h0 = c.value(zero);
            const Vec dh0 = c.gradient(zero);
            for (int i = 0; i < 1000; ++i) {
                const Vec p = random_vec(rng, 4.0);
                const double pp = dot(p, p);
                const Vec dh = c.gradient(p);
                CHECK(c.value(p) >= h0 + dot(dh0, p) + 0.5 * c.theta() * pp - 1e-10);
                CHECK(dot(dh, p) - c.value(p) >= -h0 + 0.5 * c.theta() * pp - 1e-10);
                CHECK(norm(dh) <= norm(dh0) + std::sqrt(2.0) * c.Theta() * std::sqrt(pp) + 1e-10);
            }
        }
    }

    TEST_CASE("ball-derived H matches |p| - r to 1e-8") {
        std::mt19937_64 rng(17);
        const Constraint a = constraint_from_support(ConvexBody::ball(2, 1.25));
        const Constraint b = Constraint::ball_norm(2, 1.25);
        for (int i = 0; i < 1000; ++i) {
            const Vec p = random_vec(rng, 3.0);
            CHECK(a.value(p) == doctest::Approx(b.value(p)).epsilon(1e-8));
        }
    }

    TEST_CASE("gradient matches central differences away from kinks") {
        std::mt19937_64 rng(19);
        std::vector<Constraint> cs{Constraint::ball_norm(2, 1.0), Constraint::ball_norm_squared(2, 0.8),
                                   Constraint::ellipsoid_quadratic(SymMat(2.0, 0.3, 1.0), 0.5),
                                   constraint_from_support(ConvexBody::ellipsoid(SymMat(0.25, 0.05, 0.09)))};
        const double d = 1e-6;
        for (const Constraint& c : cs)
            for (int i = 0; i < 100; ++i) {
                const Vec p = random_vec(rng, 3.0);
                if (norm(p) < 0.1) continue;
                const Vec g = c.gradient(p);
                for (int a = 0; a < 2; ++a) {
                    Vec e{0.0, 0.0};
                    e[a] = d;
                    CHECK(g[a] == doctest::Approx((c.value(p + e) - c.value(p - e)) / (2 * d)).epsilon(1e-5));
                }
            }
    }

    TEST_CASE("kink gradient picks the lexicographically smallest maximiser") {
        // At p = 0 the box (1, 1) attains max -l(v) = -1 at the four axis directions.
        const Constraint h = constraint_from_support(ConvexBody::box(Vec{1.0, 1.0}));
        const Vec g = h.gradient(Vec{0.0, 0.0});
        CHECK(g[0] == doctest::Approx(-1.0));
        CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("one-dimensional bodies") {
        const ConvexBody seg = ConvexBody::box(Vec{2.0});
        CHECK(support_function(seg, Vec{-1.0}) == 2.0);
        const Constraint h = constraint_from_support(seg);
        CHECK(h.value(Vec{3.0}) == doctest::Approx(1.0));
        CHECK(h.value(Vec{-2.5}) == doctest::Approx(0.5));
        CHECK(h.value(Vec{0.0}) == doctest::Approx(-2.0));
    }
}
