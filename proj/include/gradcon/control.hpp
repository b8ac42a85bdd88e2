#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gradcon/solver.hpp"

namespace gradcon {

/// Feedback policy for the controlled diffusion dX = sigma(X, alpha) dW - rho dxi, tabulated at
/// grid nodes and read at the node nearest to X. Boundary nodes copy their nearest interior node.
struct Policy {
    Grid grid;
    std::vector<int> branch;            // drift control: operator branch index per node
    std::vector<std::uint8_t> trigger;  // push fires where 1
    std::vector<Vec> rho;               // unit push co-direction per node (state moves along -rho)
    bool push = false;

    int drift_branch(const Vec& x) const { return branch[grid.nearest(x)]; }
    bool triggers(const Vec& x) const { return push && trigger[grid.nearest(x)] != 0; }
    const Vec& direction(const Vec& x) const { return rho[grid.nearest(x)]; }

    /// Drift from the argmax branch of u_h, push direction DH(D_h u) / |DH(D_h u)|, trigger region
    /// the active set {H(D_h u) >= -active_tol}.
    static Policy from_solution(const Problem& p, const GridFn& u, double active_tol);
    /// Fixed branch everywhere and no push.
    static Policy diffusion_only(const Grid& g, int branch = 0);
    /// Push along -rho everywhere in the open box.
    static Policy push_everywhere(const Grid& g, const Vec& rho, int branch = 0);
};

struct SimConfig {
    double dt = 1e-4;
    int paths = 100000;
    long max_steps = 1000000;
    std::uint64_t seed = 1;
};

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double truncated_fraction = 0.0;  // paths that hit max_steps before leaving the domain
};

/// l(rho) * delta: cost of a push of length delta along -rho.
double push_cost(const ConvexBody& body, const Vec& rho, double delta);

/// Monte Carlo estimate of E[ int_0^tau f(X) dt + l(rho) dxi + phi(X_tau) ] under `pol`.
/// Euler-Maruyama steps; pushes project X along -rho out of the trigger region; exits are clamped
/// to the box boundary and charged phi there. Per-path generators are derived from the seed and
/// the path index, so results do not depend on `exec` or the thread count.
/// Throws InvalidStart if x0 is not in the open box, IncompatibleConstraint if the policy pushes
/// and the constraint has no generating body.
CostEstimate simulate_cost(const Problem& p, const Policy& pol, const Vec& x0, const SimConfig& cfg,
                           Exec exec = Exec::Parallel);

struct DppEstimate {
    double lhs = 0.0;  // u_h(x0)
    CostEstimate rhs;  // E[ int_0^{tau ^ T} ... + u_h(X(tau ^ T)) ]
};

/// Both sides of the dynamic programming principle at horizon T, with u_h read by multilinear
/// interpolation. T = 0 returns u_h(x0) on both sides; an infinite T reduces to simulate_cost.
DppEstimate dpp_probe(const Problem& p, const Policy& pol, const GridFn& u, const Vec& x0, double horizon,
                      const SimConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace gradcon
