#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gradcon/solver.hpp"

namespace gradcon {

/// Discrete viscosity residual r = max{F_h(D^2 u) - f, H(D_h u)} over the interior.
struct ViscosityResidual {
    double tol = 0.0;
    double sub_max = 0.0;     // max r; subsolution side requires <= tol
    double super_min = 0.0;   // min of F_h - f where H < -10 tol; supersolution side requires >= -tol
    double residual_sup = 0.0;  // max of r^+ and of (F_h - f)^- on the clean set
    std::size_t worst_index = 0;
    Vec worst_point;
    bool sub_pass = true;
    bool super_pass = true;
    bool passed() const { return sub_pass && super_pass; }
};

ViscosityResidual viscosity_residual(const GridFn& u, const Problem& p, double tol,
                                     Exec exec = Exec::Parallel);

/// sup over the interior of H(D_h u)^+.
double constraint_violation(const GridFn& u, const Constraint& c);

/// (C + 1) eps + 10 h^2: beta <= C with the linear tail forces H <= eps (C + 1).
double violation_bound(double penalty_sup, double eps, double h);

struct ComparisonResult {
    bool pass = true;
    double worst_gap = 0.0;  // max of u - v over the grid
    std::size_t worst_index = 0;
};

/// u <= v + tol at every grid point.
ComparisonResult comparison_check(const GridFn& u, const GridFn& v, double tol = 1e-9);

/// (S . (X T X), s t |X|^2) with s, t the smallest eigenvalues of S and T.
std::pair<double, double> hessian_product_probe(const SymMat& s, const SymMat& t, const SymMat& x);

/// Interior quantities of one solution on Sigma = {points at distance >= margin from the boundary}.
struct SeminormRow {
    double margin = 0.0;
    double eps = 0.0;
    int points = 0;             // grid points per axis
    double gradient_sup = 0.0;  // sup |D_h u|
    double penalty_sup = 0.0;   // sup beta_eps(H(D_h u))
    std::array<double, 3> lp{};  // (sum h^n |D^2_h u|^p)^{1/p} for p = 2, 4, 8
    double hessian_sup = 0.0;   // sup |D^2_h u| (Frobenius)
};

inline constexpr std::array<int, 3> kSeminormExponents{2, 4, 8};

/// One row per margin for solution u at penalty parameter eps.
std::vector<SeminormRow> seminorm_rows(const GridFn& u, const Problem& p, double eps, const std::vector<double>& margins,
                                       PenaltyFamily family = PenaltyFamily::PolyBlend);

/// Variation max/min of one column at one margin across a sweep.
struct ColumnCheck {
    std::string column;
    double margin = 0.0;
    double min = 0.0;
    double max = 0.0;
    double ratio = 1.0;   // max/min; 1 for an identically zero column
    double bound = 2.0;   // growth factor the ratio must stay below
    bool asserted = true;
    bool pass = true;
};

/// Checks every column of `rows` at every margin for ratio < growth_factor. The sup|D^2_h u|
/// column is asserted only when `assert_hessian_sup` (x-independent operators).
std::vector<ColumnCheck> column_checks(const std::vector<SeminormRow>& rows, double growth_factor,
                                       bool assert_hessian_sup);

/// A named pass/fail line.
struct CheckLine {
    std::string name;
    bool pass = true;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct DiagnosticReport {
    double residual_sup = 0.0;
    double constraint_sup = 0.0;
    std::vector<std::pair<double, double>> penalty_sup;  // (eps, sup beta)
    std::vector<SeminormRow> rows;
    std::vector<ColumnCheck> columns;
    std::vector<CheckLine> checks;

    bool passed() const;
    /// Long-format CSV: section,margin,eps,points,quantity,value,bound,status.
    void write_csv(std::ostream& os) const;
    /// One "PASS name value bound" / "FAIL ..." line per check and column.
    void write_summary(std::ostream& os) const;
};

/// Solves along `schedule`, tabulating seminorm rows at every eps and margin, and flags columns
/// varying by growth_factor or more. Also checks the per-eps constraint violation bound and its
/// monotone decrease.
DiagnosticReport uniform_bound_sweep(const Problem& p, const std::vector<double>& schedule,
                                     const std::vector<double>& margins, double growth_factor = 2.0,
                                     const SolverOptions& opt = {});

/// uniform_bound_sweep on each problem (the same problem on refined grids), merged into one report
/// whose column names carry the grid size, plus refinement columns comparing the final-eps rows
/// across grids. Independent grids run concurrently on up to `jobs` threads.
DiagnosticReport refinement_sweep(const std::vector<Problem>& problems, const std::vector<double>& schedule,
                                  const std::vector<double>& margins, double growth_factor = 2.0,
                                  const SolverOptions& opt = {}, int jobs = 1);

/// Post-solve checks of one solution: viscosity residual at tol = 5h + 10 eps, constraint
/// violation bound, and the sandwich 0 <= u <= unconstrained solve.
DiagnosticReport verify_solution(const Problem& p, const GridFn& u, double eps, const SolverOptions& opt = {});

}  // namespace gradcon
