#pragma once

#include <iosfwd>
#include <string>

#include "gradcon/solver.hpp"

namespace gradcon {

/// Header x1[,x2],u then one row per grid point in index order, 17 significant digits.
void write_solution_csv(std::ostream& os, const GridFn& u);

/// Reads a solution written by write_solution_csv for grid `g`. Coordinates must match the
/// grid exactly; values round-trip bit for bit. Throws InvalidParameter naming the line.
GridFn read_solution_csv(std::istream& is, const Grid& g);

/// Human-readable summary: problem, per-eps records and active set size.
void write_report(std::ostream& os, const Problem& p, const SolveReport& rep, const SolverOptions& opt);

/// Per-eps records as CSV: eps,newton_iterations,residual,tolerance,max_constraint,max_penalty.
void write_records_csv(std::ostream& os, const std::vector<EpsilonRecord>& records);

std::string format_double(double v);

}  // namespace gradcon
