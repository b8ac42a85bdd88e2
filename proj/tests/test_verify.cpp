#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "gradcon/errors.hpp"
#include "gradcon/verify.hpp"

using namespace gradcon;
using fixtures::kSchedule;

namespace {

std::size_t count_lines(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        if (line.find(needle) != std::string::npos) ++n;
    return n;
}

SeminormRow row(double margin, double value) {
    SeminormRow r;
    r.margin = margin;
    r.gradient_sup = value;
    r.penalty_sup = value;
    r.lp = {value, value, value};
    r.hessian_sup = value;
    return r;
}

}  // namespace

TEST_SUITE("verify") {
    TEST_CASE("hessian product probe examples") {
        std::mt19937_64 rng(3);
        const SymMat x = fixtures::random_sym(rng);
        const auto [l, r] = hessian_product_probe(SymMat::identity(2), SymMat::identity(2), x);
        CHECK(l == doctest::Approx(inner(x, x)));
        CHECK(r == doctest::Approx(inner(x, x)));

        const auto [l2, r2] = hessian_product_probe(2.0 * SymMat::identity(2), 3.0 * SymMat::identity(2),
                                                    SymMat::identity(2));
        CHECK(l2 == doctest::Approx(12.0));
        CHECK(r2 == doctest::Approx(12.0));
    }

    TEST_CASE("hessian product inequality on random positive semidefinite pairs") {
        std::mt19937_64 rng(11);
        int failures = 0;
        for (int i = 0; i < 10000; ++i) {
            const SymMat s = fixtures::random_psd(rng);
            const SymMat t = fixtures::random_psd(rng);
            const SymMat x = fixtures::random_sym(rng, 2.0);
            const auto [l, r] = hessian_product_probe(s, t, x);
            if (l < r - 1e-12 * (1.0 + std::abs(l))) ++failures;
        }
        CHECK(failures == 0);
    }

    TEST_CASE("converged benchmark has a small viscosity residual") {
        const Problem p = fixtures::benchmark_1d(201);
        const SolveReport rep = solve(p, kSchedule);
        const double tol = 5.0 * p.grid.spacing(0) + 10.0 * kSchedule.back();
        const ViscosityResidual vr = viscosity_residual(rep.solution, p, tol);
        CHECK(vr.passed());
        CHECK(vr.residual_sup <= tol);
        CHECK(vr.worst_point.dim() == 1);
    }

    TEST_CASE("inactive solve satisfies both residual sides tightly") {
        const Problem p = fixtures::benchmark_1d(101, 10.0);
        const GridFn u = solve_unconstrained(p);
        const ViscosityResidual vr = viscosity_residual(u, p, 1e-8);
        CHECK(vr.passed());
        CHECK(vr.sub_max <= 1e-8);
        CHECK(vr.super_min >= -1e-8);
    }

    TEST_CASE("zero is a strict subsolution when the problem is well posed") {
        const Problem p = fixtures::bellman_2d(21);
        const GridFn zero(p.grid, p.boundary);
        const ViscosityResidual vr = viscosity_residual(zero, p, 1e-3);
        // max{-f, H(0)} = max{-2, -1}.
        CHECK(vr.sub_max == doctest::Approx(-1.0));
        CHECK(vr.sub_pass);
        CHECK_FALSE(vr.super_pass);
        CHECK(constraint_violation(zero, p.constraint) == 0.0);
    }

    TEST_CASE("residual tolerance must be positive") {
        const Problem p = fixtures::benchmark_1d(11);
        const GridFn zero(p.grid, p.boundary);
        CHECK_THROWS_AS(viscosity_residual(zero, p, 0.0), InvalidParameter);
    }

    TEST_CASE("constraint violation stays inside its bound along the schedule") {
        const Problem p = fixtures::benchmark_1d(201);
        const double h = p.grid.spacing(0);
        double previous = std::numeric_limits<double>::infinity();
        solve(p, kSchedule, {}, [&](const EpsilonRecord& rec, const GridFn& u) {
            const double v = constraint_violation(u, p.constraint);
            CHECK(v <= violation_bound(rec.max_penalty, rec.eps, h));
            CHECK(v <= previous + 1e-8);
            previous = v;
        });
        CHECK(violation_bound(3.0, 0.01, 0.1) == doctest::Approx(0.14));
    }

    TEST_CASE("comparison of a function with itself and with a lift") {
        const Problem p = fixtures::benchmark_1d(51);
        const GridFn u = GridFn::sample(p.grid, [](const Vec& x) { return 1.0 - x[0] * x[0]; });
        const ComparisonResult self = comparison_check(u, u);
        CHECK(self.pass);
        CHECK(self.worst_gap == 0.0);

        const GridFn lifted = GridFn::sample(p.grid, [](const Vec& x) { return 1.5 - x[0] * x[0]; });
        const ComparisonResult down = comparison_check(lifted, u);
        CHECK_FALSE(down.pass);
        CHECK(down.worst_gap == doctest::Approx(0.5));
        CHECK(comparison_check(u, lifted).pass);
        CHECK_THROWS_AS(comparison_check(u, GridFn(Grid::line(-1.0, 1.0, 41), p.boundary)), InvalidParameter);
    }

    TEST_CASE("seminorm rows of a quadratic") {
        // u = x^2 on [-1, 1]: D_h u = 2x and D^2_h u = 2 exactly.
        const Problem p = fixtures::benchmark_1d(21);
        const GridFn u = GridFn::sample(p.grid, [](const Vec& x) { return x[0] * x[0]; });
        const double eps = 0.1;
        const auto rows = seminorm_rows(u, p, eps, {0.2});
        REQUIRE(rows.size() == 1);
        const SeminormRow& r = rows[0];
        // Sigma = {|x| <= 0.8}: 17 points of weight h = 0.1.
        CHECK(r.points == 21);
        CHECK(r.gradient_sup == doctest::Approx(1.6));
        CHECK(r.hessian_sup == doctest::Approx(2.0));
        for (std::size_t k = 0; k < kSeminormExponents.size(); ++k)
            CHECK(r.lp[k] == doctest::Approx(2.0 * std::pow(1.7, 1.0 / kSeminormExponents[k])));
        CHECK(r.penalty_sup == doctest::Approx(PenaltyFn(eps)(1.6 * 1.6 - 1.0)));
    }

    TEST_CASE("column ratio rules") {
        const auto flat = column_checks({row(0.1, 0.0), row(0.1, 0.0)}, 2.0, true);
        REQUIRE(flat.size() == 6);
        for (const auto& c : flat) {
            CHECK(c.ratio == 1.0);
            CHECK(c.pass);
        }

        const auto appears = column_checks({row(0.1, 0.0), row(0.1, 1.0)}, 2.0, true);
        for (const auto& c : appears) {
            CHECK(std::isinf(c.ratio));
            CHECK_FALSE(c.pass);
        }

        const auto grows = column_checks({row(0.1, 1.0), row(0.1, 3.0), row(0.2, 1.0), row(0.2, 1.5)}, 2.0, false);
        REQUIRE(grows.size() == 12);
        for (const auto& c : grows) {
            if (c.margin == 0.1) CHECK(c.ratio == doctest::Approx(3.0));
            if (c.margin == 0.2) CHECK(c.ratio == doctest::Approx(1.5));
            if (c.column == "hessian_sup") {
                CHECK_FALSE(c.asserted);
                CHECK(c.pass);
            } else {
                CHECK(c.pass == (c.margin == 0.2));
            }
        }
        CHECK_THROWS_AS(column_checks({}, 1.0, true), InvalidParameter);
    }

    TEST_CASE("uniform bound sweep on the benchmark") {
        const Problem p = fixtures::benchmark_1d(201);
        const DiagnosticReport rep = uniform_bound_sweep(p, kSchedule, {0.1, 0.2});
        CHECK(rep.rows.size() == 2 * kSchedule.size());
        CHECK(rep.penalty_sup.size() == kSchedule.size());
        CHECK(rep.passed());
        std::ostringstream csv;
        rep.write_csv(csv);
        CHECK(csv.str().rfind("section,margin,eps,points,quantity,value,bound,status\n", 0) == 0);
        CHECK(count_lines(csv.str(), "FAIL") == 0);
        std::ostringstream summary;
        rep.write_summary(summary);
        CHECK(count_lines(summary.str(), "PASS") + count_lines(summary.str(), "INFO") ==
              rep.checks.size() + rep.columns.size());
    }

    TEST_CASE("inactive sweep has an identically zero penalty column") {
        const Problem p = fixtures::benchmark_1d(101, 10.0);
        const DiagnosticReport rep = uniform_bound_sweep(p, kSchedule, {0.1});
        for (const auto& r : rep.rows) CHECK(r.penalty_sup == 0.0);
        for (const auto& c : rep.columns)
            if (c.column == "penalty_sup") CHECK(c.ratio == 1.0);
        CHECK(rep.passed());
    }

    TEST_CASE("verify accepts the solution and rejects a corrupted one") {
        const Problem p = fixtures::benchmark_1d(201);
        const SolveReport solved = solve(p, kSchedule);
        const DiagnosticReport good = verify_solution(p, solved.solution, kSchedule.back());
        CHECK(good.passed());

        GridFn bad = solved.solution;
        const std::size_t mid = p.grid.nearest(Vec{0.25});
        bad.set(mid, bad[mid] + 0.1);
        const DiagnosticReport rep = verify_solution(p, bad, kSchedule.back());
        CHECK_FALSE(rep.passed());
        std::ostringstream summary;
        rep.write_summary(summary);
        CHECK(summary.str().find("FAIL subsolution_residual") != std::string::npos);
        CHECK(summary.str().find("x=0.25") != std::string::npos);
    }
}
