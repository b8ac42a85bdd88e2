#pragma once

#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gradcon/solver.hpp"

namespace fixtures {

using namespace gradcon;

inline const std::vector<double> kSchedule{1e-1, 1e-2, 1e-3, 1e-4};

/// -u'' = 2 on (-1, 1), |u'|^2 <= 1, u = 0 on the boundary.
inline Problem benchmark_1d(int m, double radius = 1.0) {
    return Problem{EllipticOperator::linear(1, [](const Vec&) { return SymMat(1.0); }, true),
                   Constraint::ball_norm_squared(1, radius), Grid::line(-1.0, 1.0, m),
                   [](const Vec&) { return 2.0; }, [](const Vec&) { return 0.0; }};
}

/// max{-tr D^2u, -(2 u_xx + u_yy)} = f on (-1, 1)^2 with |Du|^2 <= 1.
inline Problem bellman_2d(int m, double f = 2.0) {
    return Problem{EllipticOperator::bellman_max(2,
                                                 {[](const Vec&) { return SymMat::identity(2); },
                                                  [](const Vec&) { return SymMat(2.0, 0.0, 1.0); }},
                                                 true),
                   Constraint::ball_norm_squared(2, 1.0), Grid::square(-1.0, 1.0, m),
                   [f](const Vec&) { return f; }, [](const Vec&) { return 0.0; }};
}

/// Exact solution of the 1D benchmark.
inline double benchmark_exact(double x) { return std::abs(x) <= 0.5 ? 0.75 - x * x : 1.0 - std::abs(x); }

inline SymMat random_sym(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return SymMat(d(rng), d(rng), d(rng));
}

/// B B^t + shift I with B uniform in [-1, 1].
inline SymMat random_psd(std::mt19937_64& rng, double shift = 0.0) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const Mat b(d(rng), d(rng), d(rng), d(rng));
    return b.gram() + shift * SymMat::identity(2);
}

/// Sets the OpenMP thread count for one scope so parallel paths run with several threads even on
/// a single-core machine.
class ThreadScope {
public:
    explicit ThreadScope(int n) {
#ifdef _OPENMP
        saved_ = omp_get_max_threads();
        omp_set_num_threads(n);
#endif
        (void)n;
    }
    ~ThreadScope() {
#ifdef _OPENMP
        omp_set_num_threads(saved_);
#endif
    }
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

private:
    int saved_ = 1;
};

}  // namespace fixtures
