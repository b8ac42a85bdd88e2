#include "gradcon/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Pairwise summation keeps the reduction independent of how paths were scheduled.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

// Largest t >= 0 with x + t d still in the closed box.
double ray_exit(const Grid& g, const Vec& x, const Vec& d) {
    double t = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dim(); ++a) {
        if (d[a] > 0.0) t = std::min(t, (g.upper(a) - x[a]) / d[a]);
        if (d[a] < 0.0) t = std::min(t, (g.lower(a) - x[a]) / d[a]);
    }
    return std::max(t, 0.0);
}

// Nearest interior node of any node; interior nodes map to themselves.
std::size_t inward(const Grid& g, std::size_t idx) {
    auto c = g.coords(idx);
    for (int a = 0; a < g.dim(); ++a) c[a] = std::clamp(c[a], 1, g.points(a) - 2);
    return g.index(c[0], c[1]);
}

class PathSimulator {
public:
    PathSimulator(const Problem& p, const Policy& pol, const SimConfig& cfg, const GridFn* terminal)
        : p_(p), pol_(pol), cfg_(cfg), terminal_(terminal), sqrt_dt_(std::sqrt(cfg.dt)) {
        if (!(cfg.dt > 0.0) || cfg.paths < 1 || cfg.max_steps < 0)
            throw InvalidParameter("simulation needs dt > 0, paths >= 1 and max_steps >= 0");
        if (pol.push) {
            if (!p.constraint.body())
                throw IncompatibleConstraint("constraint " + p.constraint.name() +
                                             " has no generating body, so the push cost l is unavailable");
            body_ = &*p.constraint.body();
        }
        if (p.op.x_independent())
            for (int k = 0; k < p.op.branch_count(); ++k) sigma_.push_back(p.op.diffusion(k, Vec(p.grid.dim())));
        const Grid& g = p.grid;
        march_ = 0.5 * g.spacing(0);
        if (g.dim() == 2) march_ = std::min(march_, 0.5 * g.spacing(1));
    }

    struct Outcome {
        double cost;
        bool truncated;
    };

    // Runs one path for at most `steps` Euler steps; a path still inside afterwards is charged
    // the terminal function (if any) at its final position.
    Outcome run(const Vec& x0, long steps, std::uint64_t path) const {
        std::mt19937_64 rng(splitmix64(cfg_.seed ^ splitmix64(path)));
        std::normal_distribution<double> normal(0.0, 1.0);
        const Grid& g = p_.grid;
        const int d = g.dim();
        Vec x = x0;
        double cost = 0.0;
        for (long s = 0; s < steps; ++s) {
            if (pol_.triggers(x)) {
                const Vec rho = pol_.direction(x);
                const Vec dir = -1.0 * rho;
                double delta = 0.0;
                const bool exited = push_out(x, dir, delta);
                cost += push_cost(*body_, rho, delta);
                x = x + delta * dir;
                if (exited) return {cost + p_.boundary(clamp(x)), false};
            }
            cost += p_.source(x) * cfg_.dt;
            const int k = pol_.drift_branch(x);
            const Mat sig = sigma_.empty() ? p_.op.diffusion(k, x) : sigma_[k];
            Vec xi(d);
            for (int a = 0; a < d; ++a) xi[a] = normal(rng);
            const Vec next = x + sqrt_dt_ * sig.apply(xi);
            if (!g.contains_open(next)) {
                const Vec step = next - x;
                const double t = std::min(1.0, ray_exit(g, x, step));
                return {cost + p_.boundary(clamp(x + t * step)), false};
            }
            x = next;
        }
        if (terminal_) return {cost + interpolate(g, terminal_->values(), x), false};
        return {cost, true};
    }

private:
    Vec clamp(Vec x) const {
        for (int a = 0; a < p_.grid.dim(); ++a) x[a] = std::clamp(x[a], p_.grid.lower(a), p_.grid.upper(a));
        return x;
    }

    // Smallest delta moving x along dir out of the trigger region; true if that reaches the box
    // boundary first.
    bool push_out(const Vec& x, const Vec& dir, double& delta) const {
        const double tmax = ray_exit(p_.grid, x, dir);
        double inside = 0.0;
        double outside = -1.0;
        for (double t = march_; t < tmax; t += march_) {
            if (!pol_.triggers(x + t * dir)) {
                outside = t;
                break;
            }
            inside = t;
        }
        if (outside < 0.0) {
            if (!pol_.triggers(x + tmax * dir)) {
                outside = tmax;
            } else {
                delta = tmax;
                return true;
            }
        }
        for (int i = 0; i < 60 && outside - inside > 1e-14; ++i) {
            const double mid = 0.5 * (inside + outside);
            (pol_.triggers(x + mid * dir) ? inside : outside) = mid;
        }
        delta = outside;
        return false;
    }

    const Problem& p_;
    const Policy& pol_;
    const SimConfig& cfg_;
    const GridFn* terminal_;
    const ConvexBody* body_ = nullptr;
    std::vector<Mat> sigma_;
    double sqrt_dt_;
    double march_ = 0.0;
};

CostEstimate run_paths(const PathSimulator& sim, const Vec& x0, long steps, int paths, Exec exec) {
    std::vector<double> cost(paths);
    std::vector<std::uint8_t> truncated(paths);
    const auto n = static_cast<std::ptrdiff_t>(paths);
    auto body = [&](std::ptrdiff_t i) {
        const auto out = sim.run(x0, steps, static_cast<std::uint64_t>(i));
        cost[i] = out.cost;
        truncated[i] = out.truncated ? 1 : 0;
    };
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
    CostEstimate est;
    est.mean = pairwise_sum(cost.data(), cost.size()) / paths;
    std::vector<double> sq(paths);
    for (int i = 0; i < paths; ++i) sq[i] = (cost[i] - est.mean) * (cost[i] - est.mean);
    const double var = paths > 1 ? pairwise_sum(sq.data(), sq.size()) / (paths - 1) : 0.0;
    est.std_error = std::sqrt(var / paths);
    long t = 0;
    for (auto b : truncated) t += b;
    est.truncated_fraction = static_cast<double>(t) / paths;
    return est;
}

void require_start(const Grid& g, const Vec& x0) {
    if (x0.dim() != g.dim() || !g.contains_open(x0)) throw InvalidStart("x0 must lie in the open domain");
}

}  // namespace

Policy Policy::from_solution(const Problem& p, const GridFn& u, double active_tol) {
    if (!(u.grid() == p.grid)) throw InvalidParameter("policy solution grid differs from the problem grid");
    const Grid& g = p.grid;
    Policy pol{g, std::vector<int>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0),
               std::vector<Vec>(g.size(), Vec(g.dim())), true};
    const auto active = active_set(u, p.constraint, active_tol);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const std::size_t src = inward(g, idx);
        const Vec x = g.point(src);
        pol.branch[idx] = p.op.argmax_branch(hessian(u, src), x);
        const Vec dh = p.constraint.gradient(gradient(u, src));
        const double n = norm(dh);
        if (active[src] && n > 0.0) {
            pol.trigger[idx] = 1;
            pol.rho[idx] = (1.0 / n) * dh;
        }
    }
    return pol;
}

Policy Policy::diffusion_only(const Grid& g, int branch) {
    return Policy{g, std::vector<int>(g.size(), branch), std::vector<std::uint8_t>(g.size(), 0),
                  std::vector<Vec>(g.size(), Vec(g.dim())), false};
}

Policy Policy::push_everywhere(const Grid& g, const Vec& rho, int branch) {
    const double n = norm(rho);
    if (!(n > 0.0)) throw InvalidParameter("push direction must be nonzero");
    return Policy{g, std::vector<int>(g.size(), branch), std::vector<std::uint8_t>(g.size(), 1),
                  std::vector<Vec>(g.size(), (1.0 / n) * rho), true};
}

double push_cost(const ConvexBody& body, const Vec& rho, double delta) { return support_function(body, rho) * delta; }

CostEstimate simulate_cost(const Problem& p, const Policy& pol, const Vec& x0, const SimConfig& cfg, Exec exec) {
    require_start(p.grid, x0);
    const PathSimulator sim(p, pol, cfg, nullptr);
    return run_paths(sim, x0, cfg.max_steps, cfg.paths, exec);
}

DppEstimate dpp_probe(const Problem& p, const Policy& pol, const GridFn& u, const Vec& x0, double horizon,
                      const SimConfig& cfg, Exec exec) {
    require_start(p.grid, x0);
    if (!(horizon >= 0.0)) throw InvalidParameter("horizon must be nonnegative");
    DppEstimate out;
    out.lhs = interpolate(u.grid(), u.values(), x0);
    if (std::isinf(horizon)) {
        out.rhs = simulate_cost(p, pol, x0, cfg, exec);
        return out;
    }
    const long steps = std::min(cfg.max_steps, static_cast<long>(std::llround(horizon / cfg.dt)));
    const PathSimulator sim(p, pol, cfg, &u);
    out.rhs = run_paths(sim, x0, steps, cfg.paths, exec);
    return out;
}

}  // namespace gradcon
