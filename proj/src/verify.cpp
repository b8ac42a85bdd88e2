#include "gradcon/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

// Per-point elliptic branch and constraint values on the interior.
struct PointValues {
    std::vector<double> elliptic;    // F_h(D^2 u, x) - f(x)
    std::vector<double> constraint;  // H(D_h u)
};

PointValues point_values(const GridFn& u, const Problem& p, Exec exec) {
    const Grid& g = u.grid();
    const auto& interior = g.interior();
    PointValues pv{std::vector<double>(interior.size()), std::vector<double>(interior.size())};
    const auto n = static_cast<std::ptrdiff_t>(interior.size());
    auto body = [&](std::ptrdiff_t i) {
        const std::size_t idx = interior[i];
        const Vec x = g.point(idx);
        pv.elliptic[i] = p.op.eval(hessian(u, idx), x) - p.source(x);
        pv.constraint[i] = p.constraint.value(gradient(u, idx));
    };
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
    return pv;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* status(bool pass) { return pass ? "PASS" : "FAIL"; }

}  // namespace

ViscosityResidual viscosity_residual(const GridFn& u, const Problem& p, double tol,
                                     Exec exec) {
    if (!(tol > 0.0)) throw InvalidParameter("residual tolerance must be positive");
    const Grid& g = u.grid();
    const PointValues pv = point_values(u, p, exec);
    ViscosityResidual out;
    out.tol = tol;
    out.sub_max = -std::numeric_limits<double>::infinity();
    out.super_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pv.elliptic.size(); ++i) {
        const double r = std::max(pv.elliptic[i], pv.constraint[i]);
        out.sub_max = std::max(out.sub_max, r);
        double bad = std::max(r, 0.0);
        if (pv.constraint[i] < -10.0 * tol) {
            out.super_min = std::min(out.super_min, pv.elliptic[i]);
            bad = std::max(bad, -pv.elliptic[i]);
        }
        if (bad > out.residual_sup || i == 0) {
            out.residual_sup = std::max(out.residual_sup, bad);
            out.worst_index = g.interior()[i];
        }
    }
    out.worst_point = g.point(out.worst_index);
    out.sub_pass = out.sub_max <= tol;
    out.super_pass = !(out.super_min < -tol);
    return out;
}

double constraint_violation(const GridFn& u, const Constraint& c) {
    double v = 0.0;
    for (std::size_t idx : u.grid().interior()) v = std::max(v, c.value(gradient(u, idx)));
    return v;
}

double violation_bound(double penalty_sup, double eps, double h) { return (penalty_sup + 1.0) * eps + 10.0 * h * h; }

ComparisonResult comparison_check(const GridFn& u, const GridFn& v, double tol) {
    if (!(u.grid() == v.grid())) throw InvalidParameter("comparison of grid functions on different grids");
    ComparisonResult out;
    out.worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < u.grid().size(); ++idx) {
        const double gap = u[idx] - v[idx];
        if (gap > out.worst_gap) {
            out.worst_gap = gap;
            out.worst_index = idx;
        }
    }
    out.pass = out.worst_gap <= tol;
    return out;
}

std::pair<double, double> hessian_product_probe(const SymMat& s, const SymMat& t, const SymMat& x) {
    const double smin = s.min_eigenvalue();
    const double tmin = t.min_eigenvalue();
    const double xf = x.frobenius();
    return {inner(s, product_xtx(x, t)), smin * tmin * xf * xf};
}

std::vector<SeminormRow> seminorm_rows(const GridFn& u, const Problem& p, double eps, const std::vector<double>& margins,
                                       PenaltyFamily family) {
    const Grid& g = u.grid();
    const PenaltyFn beta(eps, family);
    const double vol = g.cell_volume();
    std::vector<SeminormRow> rows;
    for (double margin : margins) {
        SeminormRow row;
        row.margin = margin;
        row.eps = eps;
        row.points = g.points(0);
        std::array<double, 3> sums{};
        for (std::size_t idx : g.interior()) {
            if (g.distance_to_boundary(idx) < margin - 1e-12) continue;
            const Vec du = gradient(u, idx);
            row.gradient_sup = std::max(row.gradient_sup, norm(du));
            row.penalty_sup = std::max(row.penalty_sup, beta(p.constraint.value(du)));
            const double d2 = hessian(u, idx).frobenius();
            row.hessian_sup = std::max(row.hessian_sup, d2);
            for (std::size_t k = 0; k < kSeminormExponents.size(); ++k)
                sums[k] += vol * std::pow(d2, kSeminormExponents[k]);
        }
        for (std::size_t k = 0; k < kSeminormExponents.size(); ++k)
            row.lp[k] = std::pow(sums[k], 1.0 / kSeminormExponents[k]);
        rows.push_back(row);
    }
    return rows;
}

std::vector<ColumnCheck> column_checks(const std::vector<SeminormRow>& rows, double growth_factor,
                                       bool assert_hessian_sup) {
    if (!(growth_factor > 1.0)) throw InvalidParameter("growth factor must exceed 1");
    std::vector<double> margins;
    for (const auto& r : rows)
        if (std::find(margins.begin(), margins.end(), r.margin) == margins.end()) margins.push_back(r.margin);

    struct Column {
        const char* name;
        double (*get)(const SeminormRow&);
        bool asserted;
    };
    const Column columns[] = {
        {"gradient_sup", [](const SeminormRow& r) { return r.gradient_sup; }, true},
        {"penalty_sup", [](const SeminormRow& r) { return r.penalty_sup; }, true},
        {"hessian_l2", [](const SeminormRow& r) { return r.lp[0]; }, true},
        {"hessian_l4", [](const SeminormRow& r) { return r.lp[1]; }, true},
        {"hessian_l8", [](const SeminormRow& r) { return r.lp[2]; }, true},
        {"hessian_sup", [](const SeminormRow& r) { return r.hessian_sup; }, assert_hessian_sup},
    };
    std::vector<ColumnCheck> out;
    for (double m : margins) {
        for (const auto& col : columns) {
            ColumnCheck c;
            c.column = col.name;
            c.margin = m;
            c.asserted = col.asserted;
            c.bound = growth_factor;
            c.min = std::numeric_limits<double>::infinity();
            c.max = -std::numeric_limits<double>::infinity();
            for (const auto& r : rows) {
                if (r.margin != m) continue;
                c.min = std::min(c.min, col.get(r));
                c.max = std::max(c.max, col.get(r));
            }
            if (c.max == 0.0)
                c.ratio = 1.0;
            else if (c.min <= 0.0)
                c.ratio = std::numeric_limits<double>::infinity();
            else
                c.ratio = c.max / c.min;
            c.pass = !c.asserted || c.ratio < growth_factor;
            out.push_back(c);
        }
    }
    return out;
}

bool DiagnosticReport::passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    for (const auto& c : columns)
        if (!c.pass) return false;
    return true;
}

void DiagnosticReport::write_csv(std::ostream& os) const {
    os << "section,margin,eps,points,quantity,value,bound,status\n";
    os << "summary,,,,residual_sup," << fmt(residual_sup) << ",,\n";
    os << "summary,,,,constraint_sup," << fmt(constraint_sup) << ",,\n";
    for (const auto& [eps, b] : penalty_sup) os << "penalty," << "," << fmt(eps) << ",,penalty_sup," << fmt(b) << ",,\n";
    for (const auto& r : rows) {
        const std::string head = "seminorm," + fmt(r.margin) + "," + fmt(r.eps) + "," + std::to_string(r.points) + ",";
        os << head << "gradient_sup," << fmt(r.gradient_sup) << ",,\n";
        os << head << "penalty_sup," << fmt(r.penalty_sup) << ",,\n";
        for (std::size_t k = 0; k < kSeminormExponents.size(); ++k)
            os << head << "hessian_l" << kSeminormExponents[k] << "," << fmt(r.lp[k]) << ",,\n";
        os << head << "hessian_sup," << fmt(r.hessian_sup) << ",,\n";
    }
    for (const auto& c : columns)
        os << "variation," << fmt(c.margin) << ",,," << c.column << "," << fmt(c.ratio) << ","
           << (c.asserted ? fmt(c.bound) : "") << "," << (c.asserted ? status(c.pass) : "INFO") << "\n";
    for (const auto& c : checks)
        os << "check,,,," << c.name << "," << fmt(c.value) << "," << fmt(c.bound) << "," << status(c.pass) << "\n";
}

void DiagnosticReport::write_summary(std::ostream& os) const {
    for (const auto& c : checks) {
        os << status(c.pass) << " " << c.name << " value=" << fmt(c.value) << " bound=" << fmt(c.bound);
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    for (const auto& c : columns) {
        os << (c.asserted ? status(c.pass) : "INFO") << " variation " << c.column << " margin=" << fmt(c.margin)
           << " ratio=" << fmt(c.ratio) << "\n";
    }
}

DiagnosticReport uniform_bound_sweep(const Problem& p, const std::vector<double>& schedule,
                                     const std::vector<double>& margins, double growth_factor,
                                     const SolverOptions& opt) {
    DiagnosticReport rep;
    const double h = p.grid.max_spacing();
    double previous_violation = std::numeric_limits<double>::infinity();
    const SolveReport solved = solve(p, schedule, opt, [&](const EpsilonRecord& rec, const GridFn& u) {
        auto rows = seminorm_rows(u, p, rec.eps, margins, opt.family);
        rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
        rep.penalty_sup.emplace_back(rec.eps, rec.max_penalty);

        const double violation = constraint_violation(u, p.constraint);
        const double bound = violation_bound(rec.max_penalty, rec.eps, h);
        rep.checks.push_back({"constraint_violation eps=" + fmt(rec.eps), violation <= bound, violation, bound, ""});
        rep.checks.push_back({"violation_monotone eps=" + fmt(rec.eps), violation <= previous_violation + 1e-8,
                              violation, previous_violation + 1e-8, ""});
        previous_violation = violation;
        rep.constraint_sup = std::max(rep.constraint_sup, violation);

        const double tol = 5.0 * h + 10.0 * rec.eps;
        const ViscosityResidual vr = viscosity_residual(u, p, tol, opt.exec);
        rep.residual_sup = std::max(rep.residual_sup, vr.residual_sup);
        rep.checks.push_back({"viscosity_residual eps=" + fmt(rec.eps), vr.passed(), vr.residual_sup, tol, ""});
    });
    (void)solved;
    rep.columns = column_checks(rep.rows, growth_factor, p.op.x_independent());
    return rep;
}

DiagnosticReport refinement_sweep(const std::vector<Problem>& problems, const std::vector<double>& schedule,
                                  const std::vector<double>& margins, double growth_factor, const SolverOptions& opt,
                                  int jobs) {
    if (problems.empty()) throw InvalidParameter("refinement sweep needs at least one grid");
    const auto n = static_cast<std::ptrdiff_t>(problems.size());
    std::vector<DiagnosticReport> cells(problems.size());
    std::vector<std::string> errors(problems.size());
    SolverOptions inner = opt;
    if (jobs > 1) inner.exec = Exec::Serial;
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs)) if (jobs > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            cells[i] = uniform_bound_sweep(problems[i], schedule, margins, growth_factor, inner);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (std::ptrdiff_t i = 0; i < n; ++i)
        if (!errors[i].empty())
            throw SolveError("grid m=" + std::to_string(problems[i].grid.points(0)) + ": " + errors[i]);

    DiagnosticReport rep;
    std::vector<SeminormRow> finals;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::string tag = "m=" + std::to_string(problems[i].grid.points(0)) + " ";
        DiagnosticReport& c = cells[i];
        rep.residual_sup = std::max(rep.residual_sup, c.residual_sup);
        rep.constraint_sup = std::max(rep.constraint_sup, c.constraint_sup);
        rep.penalty_sup.insert(rep.penalty_sup.end(), c.penalty_sup.begin(), c.penalty_sup.end());
        rep.rows.insert(rep.rows.end(), c.rows.begin(), c.rows.end());
        for (auto col : c.columns) {
            col.column = tag + col.column;
            rep.columns.push_back(col);
        }
        for (auto chk : c.checks) {
            chk.name = tag + chk.name;
            rep.checks.push_back(chk);
        }
        for (const auto& r : c.rows)
            if (r.eps == schedule.back()) finals.push_back(r);
    }
    if (problems.size() > 1) {
        for (auto col : column_checks(finals, growth_factor, problems.front().op.x_independent())) {
            col.column = "refinement " + col.column;
            rep.columns.push_back(col);
        }
    }
    return rep;
}

DiagnosticReport verify_solution(const Problem& p, const GridFn& u, double eps, const SolverOptions& opt) {
    if (!(u.grid() == p.grid)) throw InvalidParameter("solution grid differs from the problem grid");
    DiagnosticReport rep;
    const double h = p.grid.max_spacing();
    const double tol = 5.0 * h + 10.0 * eps;

    const ViscosityResidual vr = viscosity_residual(u, p, tol, opt.exec);
    rep.residual_sup = vr.residual_sup;
    char where[96];
    std::snprintf(where, sizeof where, "worst at x=(%g%s%g)", vr.worst_point[0], p.grid.dim() == 2 ? "," : "",
                  p.grid.dim() == 2 ? vr.worst_point[1] : 0.0);
    const std::string at = p.grid.dim() == 2 ? where : std::string("worst at x=") + fmt(vr.worst_point[0]);
    rep.checks.push_back({"subsolution_residual", vr.sub_pass, vr.sub_max, tol, at});
    rep.checks.push_back({"supersolution_residual", vr.super_pass, std::isfinite(vr.super_min) ? vr.super_min : 0.0,
                          -tol, ""});

    const PenaltyFn beta(eps, opt.family);
    double c = 0.0;
    for (std::size_t idx : p.grid.interior())
        c = std::max(c, beta(p.constraint.value(gradient(u, idx))));
    rep.penalty_sup.emplace_back(eps, c);
    rep.constraint_sup = constraint_violation(u, p.constraint);
    const double vb = violation_bound(c, eps, h);
    rep.checks.push_back({"constraint_violation", rep.constraint_sup <= vb, rep.constraint_sup, vb, ""});

    double phi_min = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < p.grid.size(); ++idx)
        if (p.grid.is_boundary(idx)) phi_min = std::min(phi_min, u[idx]);
    if (phi_min >= 0.0) {
        const ComparisonResult lower = comparison_check(GridFn(p.grid, [](const Vec&) { return 0.0; }), u);
        rep.checks.push_back({"comparison_lower", lower.pass, lower.worst_gap, 1e-9, "0 <= u_h"});
    }
    const GridFn upper_fn = solve_unconstrained(p, opt);
    const ComparisonResult upper = comparison_check(u, upper_fn);
    rep.checks.push_back({"comparison_upper", upper.pass, upper.worst_gap, 1e-9, "u_h <= unconstrained"});
    return rep;
}

}  // namespace gradcon
