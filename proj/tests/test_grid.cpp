#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "gradcon/errors.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/polynomial.hpp"

using namespace gradcon;

namespace {

struct Quadratic {
    double c, b1, b2, a11, a12, a22;
    double operator()(const Vec& x) const {
        const double y = x.dim() == 2 ? x[1] : 0.0;
        return c + b1 * x[0] + b2 * y + a11 * x[0] * x[0] + a12 * x[0] * y + a22 * y * y;
    }
};

Quadratic random_quadratic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    return {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
}

EllipticOperator constant_linear(const SymMat& a) {
    return EllipticOperator::linear(2, [a](const Vec&) { return a; }, true);
}

}  // namespace

TEST_SUITE("grid") {
    TEST_CASE("gradient at the stated points") {
        const Grid line = Grid::line(-1.0, 1.0, 21);
        const GridFn sq = GridFn::sample(line, [](const Vec& x) { return x[0] * x[0]; });
        CHECK(gradient(sq, line.nearest(Vec{0.0}))[0] == doctest::Approx(0.0).scale(1.0));
        CHECK(gradient(sq, line.nearest(Vec{0.5}))[0] == doctest::Approx(1.0).epsilon(1e-12));
        for (int m : {5, 17, 101}) {
            const Grid g = Grid::line(-1.0, 1.0, m);
            const GridFn u = GridFn::sample(g, [](const Vec& x) { return x[0] * x[0]; });
            const std::size_t i = g.nearest(Vec{0.5});
            CHECK(gradient(u, i)[0] == doctest::Approx(2.0 * g.point(i)[0]).epsilon(1e-12));
        }

        const Grid sqr = Grid::square(-1.0, 1.0, 9);
        const GridFn aff = GridFn::sample(sqr, [](const Vec& x) { return 3.0 * x[0] - 2.0 * x[1]; });
        for (std::size_t idx : sqr.interior()) {
            const Vec g = gradient(aff, idx);
            CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-12));
            CHECK(g[1] == doctest::Approx(-2.0).epsilon(1e-12));
        }
    }

    TEST_CASE("hessian at the stated points") {
        const Grid g = Grid::square(-1.0, 1.0, 9);
        const GridFn xx = GridFn::sample(g, [](const Vec& x) { return x[0] * x[0]; });
        const GridFn xy = GridFn::sample(g, [](const Vec& x) { return x[0] * x[1]; });
        const GridFn aff = GridFn::sample(g, [](const Vec& x) { return 1.0 + 2.0 * x[0] - x[1]; });
        for (std::size_t idx : g.interior()) {
            CHECK(hessian(xx, idx).a11() == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(hessian(xy, idx).a12() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(hessian(aff, idx).frobenius() <= 1e-11);
        }
    }

    TEST_CASE("stencils are exact on random quadratics") {
        std::mt19937_64 rng(8);
        const Grid g(Vec{-1.0, 0.5}, Vec{2.0, 1.5}, {13, 7});
        for (int t = 0; t < 50; ++t) {
            const Quadratic q = random_quadratic(rng);
            const GridFn u = GridFn::sample(g, q);
            for (std::size_t idx : g.interior()) {
                const Vec x = g.point(idx);
                const Vec du = gradient(u, idx);
                const SymMat d2 = hessian(u, idx);
                CHECK(du[0] == doctest::Approx(q.b1 + 2 * q.a11 * x[0] + q.a12 * x[1]).epsilon(1e-10).scale(1.0));
                CHECK(du[1] == doctest::Approx(q.b2 + q.a12 * x[0] + 2 * q.a22 * x[1]).epsilon(1e-10).scale(1.0));
                CHECK(d2.a11() == doctest::Approx(2 * q.a11).epsilon(1e-10).scale(1.0));
                CHECK(d2.a12() == doctest::Approx(q.a12).epsilon(1e-10).scale(1.0));
                CHECK(d2.a22() == doctest::Approx(2 * q.a22).epsilon(1e-10).scale(1.0));
            }
        }
    }

    TEST_CASE("stencils are linear in u") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        const Grid g = Grid::square(0.0, 1.0, 11);
        std::vector<double> u(g.size()), v(g.size()), w(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            u[i] = d(rng);
            v[i] = d(rng);
        }
        const double a = 1.7, b = -0.4;
        for (std::size_t i = 0; i < g.size(); ++i) w[i] = a * u[i] + b * v[i];
        for (std::size_t idx : g.interior()) {
            const Vec gw = gradient(g, w, idx), gu = gradient(g, u, idx), gv = gradient(g, v, idx);
            const SymMat hw = hessian(g, w, idx), hu = hessian(g, u, idx), hv = hessian(g, v, idx);
            for (int k = 0; k < 2; ++k) CHECK(gw[k] == doctest::Approx(a * gu[k] + b * gv[k]).epsilon(1e-12).scale(10.0));
            CHECK((hw - (a * hu + b * hv)).frobenius() <= 1e-10 * (1.0 + hw.frobenius()));
        }
    }

    TEST_CASE("monotonicity check on the stated coefficients") {
        const Grid g = Grid::square(-1.0, 1.0, 7);
        CHECK(monotonicity_check(constant_linear(SymMat::identity(2)), g).pass);
        CHECK(monotonicity_check(constant_linear(SymMat(1.0, 0.5, 1.0)), g).pass);
        const MonotonicityResult bad = monotonicity_check(constant_linear(SymMat(1.0, 1.5, 3.0)), g);
        CHECK_FALSE(bad.pass);
        CHECK(bad.offending.size() == g.size());
    }

    TEST_CASE("monotonicity check lists only offending points") {
        const Grid g = Grid::square(0.0, 1.0, 11);
        const EllipticOperator op =
            EllipticOperator::linear(2, [](const Vec& x) { return SymMat(1.0, x[0], 1.0); });
        const MonotonicityResult r = monotonicity_check(op, g);
        CHECK(r.pass);  // |a12| = x1 <= 1 everywhere on [0, 1]
        const EllipticOperator op2 =
            EllipticOperator::linear(2, [](const Vec& x) { return SymMat(1.0, 2.0 * x[0], 2.0); });
        const MonotonicityResult r2 = monotonicity_check(op2, g);
        CHECK_FALSE(r2.pass);
        for (std::size_t idx : r2.offending) CHECK(g.point(idx)[0] > 0.5);
        CHECK(r2.offending.size() == 5u * 11u);  // x1 in {0.6, ..., 1.0}
    }

    TEST_CASE("grid geometry") {
        const Grid g(Vec{0.0, -1.0}, Vec{2.0, 1.0}, {5, 3});
        CHECK(g.size() == 15u);
        CHECK(g.spacing(0) == 0.5);
        CHECK(g.spacing(1) == 1.0);
        CHECK(g.interior().size() == 3u);
        CHECK(g.point(g.index(2, 1)) == Vec{1.0, 0.0});
        CHECK(g.is_boundary(g.index(0, 1)));
        CHECK_FALSE(g.is_boundary(g.index(2, 1)));
        CHECK(g.distance_to_boundary(g.index(2, 1)) == doctest::Approx(1.0));
        CHECK(g.nearest(Vec{1.1, 0.2}) == g.index(2, 1));
        CHECK(g.contains(Vec{2.0, 1.0}));
        CHECK_FALSE(g.contains_open(Vec{2.0, 0.0}));
        CHECK_THROWS_AS(Grid::line(0.0, 1.0, 2), InvalidParameter);
        CHECK_THROWS_AS(Grid::line(1.0, 0.0, 5), InvalidParameter);
    }

    TEST_CASE("grid functions keep their Dirichlet data") {
        const Grid g = Grid::square(0.0, 1.0, 5);
        GridFn u(g, [](const Vec& x) { return x[0] + 10.0 * x[1]; });
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.is_boundary(i)) {
                const Vec x = g.point(i);
                CHECK(u[i] == x[0] + 10.0 * x[1]);
            } else {
                CHECK(u[i] == 0.0);
            }
        }
        std::vector<double> v(g.size(), 7.0);
        u.assign_interior(v);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(u[i] == (g.is_boundary(i) ? u.boundary_value(i) : 7.0));
    }

    TEST_CASE("interpolation is exact on multilinear functions") {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        const Grid g = Grid::square(-1.0, 1.0, 6);
        auto f = [](const Vec& x) { return 0.5 + 2.0 * x[0] - x[1] + 3.0 * x[0] * x[1]; };
        const GridFn u = GridFn::sample(g, f);
        for (int i = 0; i < 200; ++i) {
            const Vec x{d(rng), d(rng)};
            CHECK(interpolate(g, u.values(), x) == doctest::Approx(f(x)).epsilon(1e-12));
        }
    }
}

TEST_SUITE("polynomial") {
    TEST_CASE("parse and evaluate") {
        const Polynomial p = Polynomial::parse("1 + 0.5*x1^2 - 3*x1*x2 + z^2");
        CHECK(p(Vec{2.0, 1.0}, 3.0) == doctest::Approx(1 + 0.5 * 4 - 6 + 9));
        CHECK(p.depends_on_x());
        CHECK(p.depends_on_z());
        CHECK_FALSE(Polynomial::parse("4").depends_on_x());
        CHECK(Polynomial::parse("-x2")(Vec{0.0, 2.5}) == -2.5);
        CHECK(Polynomial::parse(" 2 * x1 * x1 ")(Vec{3.0, 0.0}) == 18.0);
    }

    TEST_CASE("malformed input is rejected") {
        for (const char* bad : {"", "x3", "1 +", "x1^", "2**x1", "sin(x1)", "x1 x2"})
            CHECK_THROWS_AS(Polynomial::parse(bad), InvalidParameter);
    }

    TEST_CASE("printing round-trips") {
        const Polynomial p = Polynomial::parse("1.25 - 2*x1*x2^3 + 0.5*z");
        const Polynomial q = Polynomial::parse(p.to_string());
        for (double a : {-1.0, 0.3, 2.0}) CHECK(q(Vec{a, 1.0 - a}, a) == doctest::Approx(p(Vec{a, 1.0 - a}, a)));
    }
}
