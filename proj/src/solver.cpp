#include "gradcon/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

// Tridiagonal solve with partial pivoting (LAPACK gtsv). dl[i] = A(i+1, i), du[i] = A(i, i+1).
void tridiagonal_solve(std::vector<double>& dl, std::vector<double>& d, std::vector<double>& du,
                       std::vector<double>& b) {
    const std::size_t n = d.size();
    auto eliminate = [&](std::size_t i, bool has_second) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) throw SingularLinearSystem("zero pivot in tridiagonal solve");
            const double fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            const double temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if (has_second) {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            const double tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    };
    for (std::size_t i = 0; i + 2 < n; ++i) eliminate(i, true);
    if (n > 1) eliminate(n - 2, false);
    if (d[n - 1] == 0.0 || !std::isfinite(d[n - 1])) throw SingularLinearSystem("zero pivot in tridiagonal solve");
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
}

// Solves J delta = rhs on the interior unknowns; delta is indexed by grid point.
class NewtonLinearSolver {
public:
    explicit NewtonLinearSolver(const Grid& g) : grid_(g), pos_(g.size(), -1) {
        int k = 0;
        for (std::size_t idx : g.interior()) pos_[idx] = k++;
        n_ = k;
    }

    void solve(const JacobianRows& rows, std::span<const double> rhs, std::span<double> delta) {
        std::fill(delta.begin(), delta.end(), 0.0);
        const auto& interior = grid_.interior();
        if (grid_.dim() == 1) {
            std::vector<double> dl(n_ > 0 ? n_ - 1 : 0), d(n_), du(n_ > 0 ? n_ - 1 : 0), b(n_);
            for (int k = 0; k < n_; ++k) {
                const auto& r = rows.values[interior[k]];
                d[k] = r[0];
                if (k > 0) dl[k - 1] = r[1];
                if (k + 1 < n_) du[k] = r[2];
                b[k] = rhs[interior[k]];
            }
            tridiagonal_solve(dl, d, du, b);
            for (int k = 0; k < n_; ++k) delta[interior[k]] = b[k];
            return;
        }
        const auto off = stencil_offsets(grid_);
        triplets_.clear();
        triplets_.reserve(static_cast<std::size_t>(n_) * JacobianRows::kSlots);
        for (int k = 0; k < n_; ++k) {
            const std::size_t idx = interior[k];
            const auto& r = rows.values[idx];
            for (int s = 0; s < JacobianRows::kSlots; ++s) {
                const int col = pos_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off[s])];
                if (col >= 0) triplets_.emplace_back(k, col, r[s]);
            }
        }
        Eigen::SparseMatrix<double> a(n_, n_);
        a.setFromTriplets(triplets_.begin(), triplets_.end());
        a.makeCompressed();
        if (!analyzed_) {
            lu_.analyzePattern(a);
            analyzed_ = true;
        }
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) throw SingularLinearSystem("sparse LU factorisation failed: " + lu_.lastErrorMessage());
        Eigen::VectorXd b(n_);
        for (int k = 0; k < n_; ++k) b[k] = rhs[interior[k]];
        const Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success || !x.allFinite()) throw SingularLinearSystem("sparse LU solve failed");
        for (int k = 0; k < n_; ++k) delta[interior[k]] = x[k];
    }

private:
    const Grid& grid_;
    std::vector<int> pos_;
    int n_ = 0;
    std::vector<Eigen::Triplet<double>> triplets_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
};

struct FrozenProblem {
    std::vector<SymMat> coefficients;
    std::vector<double> source;

    explicit FrozenProblem(const Problem& p)
        : coefficients(sample_coefficients(p.op, p.grid)), source(p.grid.size()) {
        for (std::size_t idx = 0; idx < p.grid.size(); ++idx) source[idx] = p.source(p.grid.point(idx));
    }

    PenalizedSystem system(const Problem& p, const PenaltyFn* penalty, GradientScheme scheme) const {
        PenalizedSystem s;
        s.grid = &p.grid;
        s.branches = p.op.branch_count();
        s.coefficients = coefficients;
        s.source = source;
        s.constraint = &p.constraint;
        s.penalty = penalty;
        s.scheme = scheme;
        return s;
    }
};

void check_compatible(const Problem& p, const GridFn& init) {
    if (!(init.grid() == p.grid)) throw InvalidParameter("initial guess lives on a different grid");
    if (p.op.dim() != p.grid.dim() || p.constraint.dim() != p.grid.dim())
        throw InvalidParameter("operator, constraint and grid dimensions differ");
}

struct NewtonOutcome {
    std::vector<double> u;
    int iterations = 0;
    double residual = 0.0;
    double tolerance = 0.0;
};

// Rounding level of the residual evaluation: unit roundoff times the absolute stencil mass
// acting on u, plus the source. Residuals below it carry no information.
double residual_floor(const Grid& g, const JacobianRows& rows, std::span<const double> u,
                      std::span<const double> source) {
    double mass = 0.0, umax = 0.0, fmax = 0.0;
    for (std::size_t idx : g.interior()) {
        double m = 0.0;
        for (double v : rows.values[idx]) m += std::abs(v);
        mass = std::max(mass, m);
        fmax = std::max(fmax, std::abs(source[idx]));
    }
    for (double v : u) umax = std::max(umax, std::abs(v));
    return 8.0 * std::numeric_limits<double>::epsilon() * (mass * std::max(umax, 1.0) + fmax);
}

// Damped Newton with per-step branch selection. Difference weights of the penalty gradient are
// frozen for a pass and reselected from the converged iterate; the solve ends once u also meets
// the tolerance under its own weights. Every pass thus sees a residual that is smooth in u.
NewtonOutcome newton(const Problem& p, const FrozenProblem& frozen, const PenaltyFn* penalty,
                     std::vector<double> u, const SolverOptions& opt) {
    const Grid& g = p.grid;
    PenalizedSystem sys = frozen.system(p, penalty, opt.scheme);
    const double tol = opt.newton_tol > 0.0 ? opt.newton_tol : default_newton_tol(g.dim());
    const bool reselect = penalty && opt.scheme != GradientScheme::Central;

    std::vector<double> r(g.size()), trial(g.size()), rt(g.size()), delta(g.size()), rhs(g.size());
    std::vector<int> branch(g.size());
    std::vector<double> weights;
    JacobianRows rows;
    NewtonLinearSolver linear(g);

    if (reselect) {
        weights.assign(g.size() * g.dim(), 0.5);
        select_weights(sys, u, weights, opt.exec);
        sys.weights = weights;
    }

    int it = 0;
    double res = 0.0, used_tol = tol;
    for (;;) {
        penalized_residual(sys, u, r, opt.exec);
        res = max_abs(r, opt.exec);
        used_tol = tol;
        while (res > used_tol) {
            if (it >= opt.max_iters) throw NonConvergence(it, res);
            select_branches(sys, u, branch, opt.exec);
            assemble_jacobian(sys, u, branch, rows, opt.exec);
            for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
            linear.solve(rows, rhs, delta);

            double t = 1.0;
            bool accepted = false;
            for (int b = 0; b <= opt.max_backtracks; ++b, t *= 0.5) {
                for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * delta[i];
                penalized_residual(sys, trial, rt, opt.exec);
                const double rest = max_abs(rt, opt.exec);
                if (std::isfinite(rest) && rest < res) {
                    u.swap(trial);
                    r.swap(rt);
                    res = rest;
                    accepted = true;
                    break;
                }
            }
            ++it;
            if (!accepted) {
                const double floor = residual_floor(g, rows, u, frozen.source);
                if (res <= floor) {
                    used_tol = floor;
                    break;
                }
                throw NonConvergence(it, res, "backtracking found no residual decrease");
            }
        }
        if (!reselect) break;
        select_weights(sys, u, weights, opt.exec);
        penalized_residual(sys, u, r, opt.exec);
        const double reselected = max_abs(r, opt.exec);
        if (reselected <= used_tol) {
            res = reselected;
            break;
        }
        if (it >= opt.max_iters) throw NonConvergence(it, reselected, "difference weights did not settle");
    }
    return {std::move(u), it, res, used_tol};
}

double interior_max(const GridFn& u, const std::function<double(std::size_t)>& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : u.grid().interior()) m = std::max(m, f(idx));
    return m;
}

}  // namespace

double default_newton_tol(int dim) { return dim == 1 ? 1e-10 : 1e-8; }

double wellposedness_margin(const Problem& p) {
    double inf_f = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < p.grid.size(); ++idx) inf_f = std::min(inf_f, p.source(p.grid.point(idx)));
    return std::max(-inf_f, p.constraint.value(Vec(p.grid.dim())));
}

void require_wellposed(const Problem& p) {
    double inf_f = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < p.grid.size(); ++idx) inf_f = std::min(inf_f, p.source(p.grid.point(idx)));
    if (!(inf_f > 0.0)) {
        std::ostringstream os;
        os << "source f must be positive on the closed domain (min f = " << inf_f << ")";
        throw ConfigError(os.str());
    }
    const double h0 = p.constraint.value(Vec(p.grid.dim()));
    if (!(h0 < 0.0)) {
        std::ostringstream os;
        os << "constraint must satisfy H(0) < 0 (H(0) = " << h0 << ")";
        throw ConfigError(os.str());
    }
}

PenalizedResult solve_penalized(const Problem& p, double eps, const GridFn& init, const SolverOptions& opt) {
    check_compatible(p, init);
    const PenaltyFn beta(eps, opt.family);
    const FrozenProblem frozen(p);
    std::vector<double> u0(init.values().begin(), init.values().end());
    NewtonOutcome out = newton(p, frozen, &beta, std::move(u0), opt);
    GridFn sol(p.grid, std::move(out.u));

    EpsilonRecord rec;
    rec.eps = eps;
    rec.newton_iterations = out.iterations;
    rec.residual = out.residual;
    rec.tolerance = out.tolerance;
    rec.max_constraint = interior_max(
        sol, [&](std::size_t idx) { return p.constraint.value(gradient(sol, idx)); });
    rec.max_penalty = std::max(0.0, beta(rec.max_constraint));
    return {std::move(sol), rec};
}

GridFn solve_unconstrained(const Problem& p, const SolverOptions& opt) {
    const FrozenProblem frozen(p);
    GridFn init(p.grid, p.boundary);
    std::vector<double> u0(init.values().begin(), init.values().end());
    NewtonOutcome out = newton(p, frozen, nullptr, std::move(u0), opt);
    return GridFn(p.grid, std::move(out.u));
}

std::vector<double> geometric_schedule(double eps0, double ratio, int count) {
    if (!(eps0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
        throw InvalidParameter("schedule needs eps0 > 0, 0 < ratio < 1 and count >= 1");
    std::vector<double> s(count);
    for (int i = 0; i < count; ++i) s[i] = eps0 * std::pow(ratio, i);
    return s;
}

SolveReport solve(const Problem& p, const std::vector<double>& schedule, const SolverOptions& opt,
                  const EpsilonObserver& observer) {
    if (schedule.empty()) throw InvalidParameter("epsilon schedule is empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0)) throw InvalidParameter("epsilon schedule entries must be positive");
        if (i > 0 && !(schedule[i] < schedule[i - 1]))
            throw InvalidParameter("epsilon schedule must be strictly decreasing");
    }
    const auto start = std::chrono::steady_clock::now();
    GridFn unconstrained = [&] {
        try {
            return solve_unconstrained(p, opt);
        } catch (const SolveError& e) {
            throw SolveError(std::string("unconstrained solve: ") + e.what());
        }
    }();

    GridFn current = unconstrained;
    std::vector<EpsilonRecord> records;
    for (double eps : schedule) {
        try {
            PenalizedResult res = solve_penalized(p, eps, current, opt);
            current = std::move(res.solution);
            records.push_back(res.record);
            if (observer) observer(records.back(), current);
        } catch (const SolveError& e) {
            std::ostringstream os;
            os << "eps = " << eps << ": " << e.what();
            throw SolveError(os.str());
        }
    }
    const double tol = 10.0 * schedule.back();
    auto active = active_set(current, p.constraint, tol);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return SolveReport{std::move(current), std::move(unconstrained), std::move(records), std::move(active), tol, wall};
}

std::vector<std::uint8_t> active_set(const GridFn& u, const Constraint& c, double tol) {
    if (!(tol > 0.0)) throw InvalidParameter("active set tolerance must be positive");
    std::vector<std::uint8_t> mask(u.grid().size(), 0);
    for (std::size_t idx : u.grid().interior()) mask[idx] = c.value(gradient(u, idx)) >= -tol ? 1 : 0;
    return mask;
}

}  // namespace gradcon
