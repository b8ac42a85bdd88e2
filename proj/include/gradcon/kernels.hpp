#pragma once

// Data-parallel grid kernels. Every kernel has a serial reference path and an OpenMP path
// selected by Exec; both visit points independently, so results agree bit for bit.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gradcon/constraint.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/linalg.hpp"
#include "gradcon/penalty.hpp"

namespace gradcon {

enum class Exec { Serial, Parallel };

/// Difference quotient for Du inside the penalty term. Per axis it is
///   p_a = w D^-_a u + (1 - w) D^+_a u
/// with a backward weight w in [0, 1] chosen by the scheme.
enum class GradientScheme {
    /// w = 1/2 (exact central difference).
    Central,
    /// w = 1 where dH/dp_a > 0, 0 where it is < 0, 1/2 where its sign is not resolved above
    /// rounding of the central difference.
    Upwind,
};

const char* to_string(GradientScheme s);
/// "central" or "upwind"; throws InvalidParameter otherwise.
GradientScheme parse_gradient_scheme(const std::string& name);

/// Number of OpenMP threads available to Exec::Parallel (1 without OpenMP).
int parallel_threads();

/// Frozen per-point data of F_h(D^2 u, x) + beta(H(D_h u)) - f on one grid.
struct PenalizedSystem {
    const Grid* grid = nullptr;
    int branches = 1;
    std::span<const SymMat> coefficients;  // a_k(x_idx) at [idx * branches + k]
    std::span<const double> source;        // f at every grid point
    const Constraint* constraint = nullptr;
    const PenaltyFn* penalty = nullptr;    // null: unconstrained elliptic problem
    GradientScheme scheme = GradientScheme::Central;
    /// Optional frozen backward weights at [idx * dim + axis]; empty derives them from u.
    std::span<const double> weights;
};

/// Samples a_k(x) of every branch at every grid point.
std::vector<SymMat> sample_coefficients(const EllipticOperator& op, const Grid& g);

/// Backward weights of the scheme at every interior point, derived from u.
void select_weights(const PenalizedSystem& sys, std::span<const double> u, std::span<double> weights, Exec exec);

/// Penalty-term gradient at interior point idx under the system's scheme and weights.
Vec penalty_gradient(const PenalizedSystem& sys, std::span<const double> u, std::size_t idx);

/// r = F_h(D^2 u) + beta(H(D_h u)) - f on interior points, 0 on the boundary.
void penalized_residual(const PenalizedSystem& sys, std::span<const double> u, std::span<double> r, Exec exec);

/// Maximising branch of every interior point (ties to the smallest index); boundary gets 0.
void select_branches(const PenalizedSystem& sys, std::span<const double> u, std::span<int> branch, Exec exec);

/// Nine-point Jacobian rows, slot order: centre, -x, +x, -y, +y, (-x,-y), (+x,-y), (-x,+y), (+x,+y).
/// Entries referring to boundary points are zero (their increments vanish).
struct JacobianRows {
    static constexpr int kSlots = 9;
    std::vector<std::array<double, kSlots>> values;  // one row per grid index (boundary rows unused)
};

/// Linearisation F_M(D^2 u) : D^2 + beta'(H) DH . D_h of the penalised residual at u, using the
/// branch selection in `branch` (frozen policy) and the system's weights (held fixed).
void assemble_jacobian(const PenalizedSystem& sys, std::span<const double> u, std::span<const int> branch,
                       JacobianRows& rows, Exec exec);

/// Grid index offsets for the nine Jacobian slots.
std::array<std::ptrdiff_t, JacobianRows::kSlots> stencil_offsets(const Grid& g);

double max_abs(std::span<const double> v, Exec exec);

}  // namespace gradcon
