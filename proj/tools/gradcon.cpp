// gradcon: solve, sweep, verify and Monte Carlo checks for gradient-constrained HJB problems.
//
// Exit codes: 0 success, 1 configuration or input error, 2 solve failure, 3 verification failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "gradcon/config.hpp"
#include "gradcon/control.hpp"
#include "gradcon/errors.hpp"
#include "gradcon/io.hpp"
#include "gradcon/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace gradcon;

namespace {

constexpr int kConfigExit = 1;
constexpr int kSolveExit = 2;
constexpr int kVerifyExit = 3;

struct Options {
    std::string config;
    std::string out = "out";
    std::string solution;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    bool override_wellposedness = false;
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
}

SolveReport run_solve(const RunConfig& cfg) {
    return solve(cfg.problem, cfg.schedule, cfg.solver);
}

int cmd_solve(const RunConfig& cfg, const fs::path& out) {
    const SolveReport rep = run_solve(cfg);
    auto sol = open_out(out, "solution.csv");
    write_solution_csv(sol, rep.solution);
    auto report = open_out(out, "report.txt");
    write_report(report, cfg.problem, rep, cfg.solver);
    auto records = open_out(out, "records.csv");
    write_records_csv(records, rep.records);
    write_report(std::cout, cfg.problem, rep, cfg.solver);
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out, int jobs) {
    std::vector<Problem> problems{cfg.problem};
    for (int m : cfg.refinements)
        if (m != cfg.problem.grid.points(0)) problems.push_back(cfg.refined(m));
    const DiagnosticReport rep =
        refinement_sweep(problems, cfg.schedule, cfg.margins, cfg.growth_factor, cfg.solver, jobs);
    auto csv = open_out(out, "diagnostics.csv");
    rep.write_csv(csv);
    auto report = open_out(out, "report.txt");
    rep.write_summary(report);
    rep.write_summary(std::cout);
    return rep.passed() ? 0 : kVerifyExit;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out, const std::string& solution_path) {
    std::optional<GridFn> u;
    if (!solution_path.empty()) {
        std::ifstream in(solution_path);
        if (!in) throw ConfigError("cannot open solution file '" + solution_path + "'");
        u = read_solution_csv(in, cfg.problem.grid);
    } else {
        u = run_solve(cfg).solution;
    }
    const DiagnosticReport rep = verify_solution(cfg.problem, *u, cfg.final_eps(), cfg.solver);
    auto csv = open_out(out, "diagnostics.csv");
    rep.write_csv(csv);
    auto report = open_out(out, "report.txt");
    rep.write_summary(report);
    rep.write_summary(std::cout);
    return rep.passed() ? 0 : kVerifyExit;
}

int cmd_mc(const RunConfig& cfg, const fs::path& out) {
    const SolveReport solved = run_solve(cfg);
    const Problem& p = cfg.problem;
    const Policy pol = Policy::from_solution(p, solved.solution, solved.active_tol);
    std::vector<Vec> starts = cfg.mc.starts;
    if (starts.empty()) {
        Vec c(p.grid.dim());
        for (int a = 0; a < p.grid.dim(); ++a) c[a] = 0.5 * (p.grid.lower(a) + p.grid.upper(a));
        starts.push_back(c);
    }
    auto csv = open_out(out, "mc.csv");
    const std::string coords = p.grid.dim() == 1 ? "x1" : "x1,x2";
    csv << coords << ",u_h,mean,std_error,truncated_fraction,dpp_lhs,dpp_rhs,dpp_std_error,status\n";
    bool all = true;
    for (const Vec& x0 : starts) {
        const double uh = interpolate(p.grid, solved.solution.values(), x0);
        const CostEstimate est = simulate_cost(p, pol, x0, cfg.mc.sim);
        const DppEstimate dpp = dpp_probe(p, pol, solved.solution, x0, cfg.mc.horizon, cfg.mc.sim);
        const bool pass = est.mean + 3.0 * est.std_error >= uh - cfg.mc.slack &&
                          dpp.rhs.mean + 3.0 * dpp.rhs.std_error >= dpp.lhs - cfg.mc.slack;
        all = all && pass;
        for (int a = 0; a < p.grid.dim(); ++a) csv << format_double(x0[a]) << ',';
        csv << format_double(uh) << ',' << format_double(est.mean) << ',' << format_double(est.std_error) << ','
            << format_double(est.truncated_fraction) << ',' << format_double(dpp.lhs) << ','
            << format_double(dpp.rhs.mean) << ',' << format_double(dpp.rhs.std_error) << ','
            << (pass ? "PASS" : "FAIL") << '\n';
        std::printf("%s x0=(%g%s) u_h=%.6f mean=%.6f se=%.6f truncated=%.4f dpp_rhs=%.6f\n", pass ? "PASS" : "FAIL",
                    x0[0], p.grid.dim() == 2 ? (", " + std::to_string(x0[1])).c_str() : "", uh, est.mean,
                    est.std_error, est.truncated_fraction, dpp.rhs.mean);
        if (est.truncated_fraction > 0.01)
            std::printf("warning: %.2f%% of paths truncated at max_steps\n", 100.0 * est.truncated_fraction);
    }
    return all ? 0 : kVerifyExit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalty solver and diagnostics for HJB equations with convex gradient constraints"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--jobs", o.jobs, "Threads for independent sweep cells")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "Monte Carlo master seed (overrides [mc] seed)");
        sub->add_flag("--override-wellposedness", o.override_wellposedness,
                      "Run even if f > 0 and H(0) < 0 do not both hold");
    };
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve along the eps schedule; writes solution.csv and report.txt");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Uniform-bound tables across eps and grid refinements");
    CLI::App* verify_cmd = app.add_subcommand("verify", "Viscosity residual, constraint violation and comparison checks");
    CLI::App* mc_cmd = app.add_subcommand("mc-check", "Monte Carlo singular-control bound at the configured x0");
    for (CLI::App* sub : {solve_cmd, sweep_cmd, verify_cmd, mc_cmd}) add_common(sub);
    verify_cmd->add_option("--solution", o.solution, "Verify this solution CSV instead of solving")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        RunConfig cfg = load_config(o.config, !o.override_wellposedness);
        if (o.seed) cfg.mc.sim.seed = *o.seed;
        const fs::path out(o.out);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw ConfigError("cannot create output directory '" + o.out + "': " + ec.message());
        if (*solve_cmd) return cmd_solve(cfg, out);
        if (*sweep_cmd) return cmd_sweep(cfg, out, o.jobs);
        if (*verify_cmd) return cmd_verify(cfg, out, o.solution);
        if (*mc_cmd) return cmd_mc(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const SolveError& e) {
        std::cerr << "solve error: " << e.what() << "\n";
        return kSolveExit;
    } catch (const ValidationFailure& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kVerifyExit;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigExit;
    }
    return 0;
}
