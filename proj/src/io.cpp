#include "gradcon/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "gradcon/errors.hpp"

namespace gradcon {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_solution_csv(std::ostream& os, const GridFn& u) {
    const Grid& g = u.grid();
    os << (g.dim() == 1 ? "x1,u\n" : "x1,x2,u\n");
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec x = g.point(idx);
        for (int a = 0; a < g.dim(); ++a) os << format_double(x[a]) << ',';
        os << format_double(u[idx]) << '\n';
    }
}

GridFn read_solution_csv(std::istream& is, const Grid& g) {
    std::string line;
    const std::string header = g.dim() == 1 ? "x1,u" : "x1,x2,u";
    if (!std::getline(is, line)) throw InvalidParameter("solution file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw InvalidParameter("line 1: expected header '" + header + "'");
    std::vector<double> values(g.size());
    std::size_t idx = 0;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (idx >= g.size()) throw InvalidParameter("line " + std::to_string(lineno) + ": more rows than grid points");
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw InvalidParameter("line " + std::to_string(lineno) + ": malformed number '" + cell + "'");
            cols.push_back(v);
        }
        if (static_cast<int>(cols.size()) != g.dim() + 1)
            throw InvalidParameter("line " + std::to_string(lineno) + ": expected " + std::to_string(g.dim() + 1) +
                                   " columns");
        const Vec x = g.point(idx);
        for (int a = 0; a < g.dim(); ++a)
            if (cols[a] != x[a])
                throw InvalidParameter("line " + std::to_string(lineno) + ": coordinates do not match the grid");
        values[idx++] = cols.back();
    }
    if (idx != g.size()) throw InvalidParameter("solution file has fewer rows than grid points");
    return GridFn(g, std::move(values));
}

void write_records_csv(std::ostream& os, const std::vector<EpsilonRecord>& records) {
    os << "eps,newton_iterations,residual,tolerance,max_constraint,max_penalty\n";
    for (const auto& r : records)
        os << format_double(r.eps) << ',' << r.newton_iterations << ',' << format_double(r.residual) << ','
           << format_double(r.tolerance) << ',' << format_double(r.max_constraint) << ','
           << format_double(r.max_penalty) << '\n';
}

void write_report(std::ostream& os, const Problem& p, const SolveReport& rep, const SolverOptions& opt) {
    const Grid& g = p.grid;
    os << "operator: " << p.op.name() << "\n";
    os << "constraint: " << p.constraint.name() << "\n";
    os << "grid: " << g.points(0);
    if (g.dim() == 2) os << " x " << g.points(1);
    os << " points, h = " << format_double(g.max_spacing()) << "\n";
    os << "penalty: " << to_string(opt.family) << "\n";
    os << "gradient scheme: " << to_string(opt.scheme) << "\n";
    os << "wall seconds: " << format_double(rep.wall_seconds) << "\n\n";
    os << "eps newton_iterations residual tolerance max_constraint max_penalty\n";
    for (const auto& r : rep.records)
        os << format_double(r.eps) << ' ' << r.newton_iterations << ' ' << format_double(r.residual) << ' '
           << format_double(r.tolerance) << ' ' << format_double(r.max_constraint) << ' '
           << format_double(r.max_penalty) << '\n';
    std::size_t active = 0;
    for (auto b : rep.active) active += b;
    os << "\nactive set: " << active << " of " << g.interior().size() << " interior points (tol "
       << format_double(rep.active_tol) << ")\n";
    Vec mid(g.dim());
    for (int a = 0; a < g.dim(); ++a) mid[a] = 0.5 * (g.lower(a) + g.upper(a));
    os << "u_h at the domain centre: " << format_double(interpolate(g, rep.solution.values(), mid)) << "\n";
}

}  // namespace gradcon
