#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gradcon/constraint.hpp"
#include "gradcon/elliptic_operator.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/kernels.hpp"
#include "gradcon/penalty.hpp"

namespace gradcon {

/// max{F(D^2 u, x) - f(x), H(Du)} = 0 in the box, u = phi on its boundary.
struct Problem {
    EllipticOperator op;
    Constraint constraint;
    Grid grid;
    ScalarField source;
    ScalarField boundary;
};

/// kappa = max{-inf f, H(0)} over the grid. Negative means u = 0 is a strict subsolution.
double wellposedness_margin(const Problem& p);
/// Throws ConfigError unless f > 0 on the grid and H(0) < 0.
void require_wellposed(const Problem& p);

struct SolverOptions {
    double newton_tol = 0.0;  // 0 selects the per-dimension default
    int max_iters = 200;
    int max_backtracks = 30;
    PenaltyFamily family = PenaltyFamily::PolyBlend;
    GradientScheme scheme = GradientScheme::Central;
    Exec exec = Exec::Parallel;
};

/// 1e-10 in 1D, 1e-8 in 2D.
double default_newton_tol(int dim);

struct EpsilonRecord {
    double eps = 0.0;
    int newton_iterations = 0;
    double residual = 0.0;        // final penalised residual, infinity norm
    double tolerance = 0.0;       // tolerance the residual was driven below
    double max_constraint = 0.0;  // max interior H(D_h u)
    double max_penalty = 0.0;     // max interior beta(H(D_h u))
};

struct SolveReport {
    GridFn solution;
    GridFn unconstrained;
    std::vector<EpsilonRecord> records;
    std::vector<std::uint8_t> active;
    double active_tol = 0.0;
    double wall_seconds = 0.0;
};

struct PenalizedResult {
    GridFn solution;
    EpsilonRecord record;
};

/// Damped Newton with policy (branch) freezing on the penalised equation.
/// Throws NonConvergence or SingularLinearSystem.
PenalizedResult solve_penalized(const Problem& p, double eps, const GridFn& init, const SolverOptions& opt = {});

/// The elliptic problem without the gradient constraint (beta = 0).
GridFn solve_unconstrained(const Problem& p, const SolverOptions& opt = {});

using EpsilonObserver = std::function<void(const EpsilonRecord&, const GridFn&)>;

/// epsilon continuation: unconstrained start, then warm-started penalised solves along the
/// strictly decreasing schedule. Failures are rethrown as SolveError naming the failing eps.
SolveReport solve(const Problem& p, const std::vector<double>& schedule, const SolverOptions& opt = {},
                  const EpsilonObserver& observer = {});

/// eps_0, eps_0 r, ..., eps_0 r^{count-1}.
std::vector<double> geometric_schedule(double eps0, double ratio, int count);

/// Interior points with H(D_h u) >= -tol.
std::vector<std::uint8_t> active_set(const GridFn& u, const Constraint& c, double tol);

}  // namespace gradcon
