#pragma once

// Run configuration: a sectioned key = value text file.
//
//   # comment
//   [section]
//   key = 1.5                  number
//   key = "text"               string
//   key = true                 boolean
//   key = [[1, 0], [0, "x1"]]  array, may span lines while brackets are open
//
// Coefficients and source/boundary data are numbers or quoted polynomials in x1, x2 (and z for
// diffusion controls). Unknown sections or keys are errors. Every error names its line.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gradcon/control.hpp"
#include "gradcon/solver.hpp"

namespace gradcon {

struct McSettings {
    std::vector<Vec> starts;  // x0 points
    SimConfig sim;
    double slack = 0.02;      // one-sided oracle slack
    double horizon = 0.1;     // dynamic programming probe horizon
};

struct RunConfig {
    Problem problem;
    std::vector<double> schedule;
    SolverOptions solver;
    std::vector<double> margins{0.1, 0.2};
    double growth_factor = 2.0;
    std::vector<int> refinements;  // points per axis for the grid sweep
    McSettings mc;

    double final_eps() const { return schedule.back(); }
    /// The same problem on a grid with m points per axis.
    Problem refined(int m) const;
};

/// Throws ConfigError (line-anchored where a line applies). With `enforce_wellposedness`, also
/// throws ConfigError unless f > 0 on the grid and H(0) < 0.
RunConfig parse_config(std::string_view text, bool enforce_wellposedness = true);
RunConfig load_config(const std::string& path, bool enforce_wellposedness = true);

}  // namespace gradcon
