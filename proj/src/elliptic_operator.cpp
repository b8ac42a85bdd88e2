#include "gradcon/elliptic_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

std::string fmt(const SymMat& m) {
    std::ostringstream os;
    os.precision(6);
    if (m.dim() == 1) os << "[" << m.a11() << "]";
    else os << "[[" << m.a11() << "," << m.a12() << "],[" << m.a12() << "," << m.a22() << "]]";
    return os.str();
}

std::string fmt(const Vec& v) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (int i = 0; i < v.dim(); ++i) os << (i ? "," : "") << v[i];
    os << ")";
    return os.str();
}

SymMat random_sym(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    if (n == 1) return SymMat(u(rng));
    return SymMat(u(rng), u(rng), u(rng));
}

SymMat random_psd(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat b(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = u(rng);
    return b.gram();
}

}  // namespace

EllipticOperator::EllipticOperator(OperatorKind kind, int dim, std::vector<CoefficientField> branches,
                                   bool x_independent, StructuralConstants declared)
    : kind_(kind), dim_(dim), branches_(std::move(branches)), x_independent_(x_independent),
      declared_(declared) {
    if (dim_ < 1 || dim_ > kMaxDim) throw InvalidParameter("operator dimension must be 1 or 2");
    if (branches_.empty()) throw InvalidParameter("operator needs at least one branch");
    if (declared_.lambda && !(*declared_.lambda > 0.0)) throw InvalidParameter("lambda must be positive");
    if (declared_.Lambda && !(*declared_.Lambda > 0.0)) throw InvalidParameter("Lambda must be positive");
    if (declared_.lambda && declared_.Lambda && *declared_.lambda > *declared_.Lambda)
        throw InvalidParameter("lambda exceeds Lambda");
    if (declared_.upsilon && !(*declared_.upsilon >= 0.0)) throw InvalidParameter("upsilon must be nonnegative");
}

EllipticOperator EllipticOperator::linear(int dim, CoefficientField a, bool x_independent,
                                          StructuralConstants declared) {
    return EllipticOperator(OperatorKind::Linear, dim, {std::move(a)}, x_independent, declared);
}

EllipticOperator EllipticOperator::bellman_max(int dim, std::vector<CoefficientField> branches, bool x_independent,
                                               StructuralConstants declared) {
    return EllipticOperator(OperatorKind::BellmanMax, dim, std::move(branches), x_independent, declared);
}

EllipticOperator EllipticOperator::diffusion_sup(int dim, DiffusionField sigma, std::vector<double> controls,
                                                 bool x_independent, StructuralConstants declared) {
    if (controls.empty()) throw InvalidParameter("diffusion_sup needs a nonempty finite control set");
    std::vector<CoefficientField> branches;
    branches.reserve(controls.size());
    for (double z : controls)
        branches.emplace_back([sigma, z](const Vec& x) { return 0.5 * sigma(x, z).gram(); });
    EllipticOperator op(OperatorKind::DiffusionSup, dim, std::move(branches), x_independent, declared);
    op.sigma_ = std::move(sigma);
    op.controls_ = std::move(controls);
    return op;
}

Mat EllipticOperator::diffusion(int k, const Vec& x) const {
    if (kind_ == OperatorKind::DiffusionSup) return sigma_(x, controls_[k]);
    return to_mat(psd_sqrt(2.0 * branches_[k](x)));
}

double EllipticOperator::eval(const SymMat& m, const Vec& x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : branches_) best = std::max(best, -inner(a(x), m));
    return best;
}

int EllipticOperator::argmax_branch(const SymMat& m, const Vec& x) const {
    int best_k = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < branch_count(); ++k) {
        const double v = -inner(branches_[k](x), m);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    return best_k;
}

SymMat EllipticOperator::linearize(const SymMat& m, const Vec& x) const {
    return -branches_[argmax_branch(m, x)](x);
}

std::string EllipticOperator::name() const {
    switch (kind_) {
        case OperatorKind::Linear: return "linear";
        case OperatorKind::BellmanMax: return "bellman_max";
        case OperatorKind::DiffusionSup: return "diffusion_sup";
    }
    return "?";
}

bool ValidationReport::passed() const {
    return std::all_of(probes.begin(), probes.end(), [](const ProbeResult& p) { return p.pass; });
}

void ValidationReport::throw_if_failed() const {
    for (const auto& p : probes)
        if (!p.pass) throw ValidationFailure(p.hypothesis + " violated: " + p.witness);
}

ValidationReport validate(const EllipticOperator& op, std::span<const Vec> sample, int probes,
                          unsigned long long seed) {
    if (probes < 100) throw InvalidParameter("validate needs at least 100 probes");
    if (sample.empty()) throw InvalidParameter("validate needs a nonempty domain sample");
    const int n = op.dim();
    const int nb = op.branch_count();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
    constexpr double tol = 1e-9;

    ValidationReport rep;

    // Coefficient eigenvalue scan (the linear ellipticity bounds at every sample point).
    rep.lambda = std::numeric_limits<double>::infinity();
    rep.Lambda = -std::numeric_limits<double>::infinity();
    ProbeResult eig{"coefficient eigenvalues in [lambda, Lambda]", true, 0.0, ""};
    const double lam_decl = op.declared().lambda.value_or(0.0);
    const double Lam_decl = op.declared().Lambda.value_or(std::numeric_limits<double>::infinity());
    for (const Vec& x : sample)
        for (int k = 0; k < nb; ++k) {
            const auto [lo, hi] = op.coefficient(k, x).eigenvalues();
            rep.lambda = std::min(rep.lambda, lo);
            rep.Lambda = std::max(rep.Lambda, hi);
            const double slack = std::min(lo - lam_decl, Lam_decl - hi);
            if (slack < eig.worst_slack) {
                eig.worst_slack = slack;
                eig.witness = "branch " + std::to_string(k) + " x=" + fmt(x) + " a=" + fmt(op.coefficient(k, x));
            }
        }
    eig.pass = eig.worst_slack >= -1e-12 && rep.lambda > 0.0;
    if (!(rep.lambda > 0.0) && eig.witness.empty()) eig.witness = "coefficient not positive definite";
    rep.probes.push_back(eig);

    const double lam = op.declared().lambda.value_or(rep.lambda);
    const double Lam = op.declared().Lambda.value_or(rep.Lambda);

    // Uniform ellipticity in PSD directions.
    ProbeResult ell{"uniform ellipticity", true, 0.0, ""};
    for (int i = 0; i < probes; ++i) {
        const Vec& x = sample[pick(rng)];
        const SymMat m = random_sym(rng, n, 5.0);
        const SymMat nn = random_psd(rng, n);
        const double diff = op.eval(m + nn, x) - op.eval(m, x);
        const double tr = nn.trace();
        const double slack = std::min(diff + Lam * tr + tol, -lam * tr + tol - diff);
        if (slack < ell.worst_slack) {
            ell.worst_slack = slack;
            ell.witness = "M=" + fmt(m) + " N=" + fmt(nn) + " x=" + fmt(x);
        }
    }
    ell.pass = ell.worst_slack >= 0.0;
    rep.probes.push_back(ell);

    // Convexity in M (midpoint form).
    ProbeResult cvx{"convexity in M", true, 0.0, ""};
    for (int i = 0; i < probes; ++i) {
        const Vec& x = sample[pick(rng)];
        const SymMat m1 = random_sym(rng, n, 5.0);
        const SymMat m2 = random_sym(rng, n, 5.0);
        const double slack = 0.5 * (op.eval(m1, x) + op.eval(m2, x)) - op.eval(0.5 * (m1 + m2), x) + tol;
        if (slack < cvx.worst_slack) {
            cvx.worst_slack = slack;
            cvx.witness = "M=" + fmt(m1) + " N=" + fmt(m2) + " x=" + fmt(x);
        }
    }
    cvx.pass = cvx.worst_slack >= 0.0;
    rep.probes.push_back(cvx);

    // Lipschitz estimates of the coefficients over random and neighbouring pairs.
    double lip_a = 0.0, lip_sqrt = 0.0, lip_sigma = 0.0;
    auto visit_pair = [&](const Vec& x, const Vec& y) {
        const double d = norm(x - y);
        if (d <= 0.0) return;
        for (int k = 0; k < nb; ++k) {
            const SymMat ax = op.coefficient(k, x), ay = op.coefficient(k, y);
            lip_a = std::max(lip_a, (ax - ay).frobenius() / d);
            lip_sqrt = std::max(lip_sqrt, (psd_sqrt(ax) - psd_sqrt(ay)).frobenius() / d);
            if (op.kind() == OperatorKind::DiffusionSup)
                lip_sigma = std::max(lip_sigma, (op.diffusion(k, x) - op.diffusion(k, y)).frobenius() / d);
        }
    };
    for (std::size_t i = 0; i + 1 < sample.size(); ++i) visit_pair(sample[i], sample[i + 1]);
    for (int i = 0; i < probes; ++i) visit_pair(sample[pick(rng)], sample[pick(rng)]);
    rep.upsilon = op.declared().upsilon.value_or(lip_a);
    rep.omega_coefficient = op.kind() == OperatorKind::DiffusionSup ? 1.5 * lip_sigma * lip_sigma
                                                                     : 3.0 * lip_sqrt * lip_sqrt;

    // x-regularity |F(M,x) - F(M,y)| <= Upsilon (|M| + 1) |x - y|.
    ProbeResult xreg{"x-regularity", true, 0.0, ""};
    for (int i = 0; i < probes; ++i) {
        const Vec& x = sample[pick(rng)];
        const Vec& y = sample[pick(rng)];
        const SymMat m = random_sym(rng, n, 5.0);
        const double lhs = std::abs(op.eval(m, x) - op.eval(m, y));
        const double slack = rep.upsilon * (m.frobenius() + 1.0) * norm(x - y) + tol - lhs;
        if (slack < xreg.worst_slack) {
            xreg.worst_slack = slack;
            xreg.witness = "M=" + fmt(m) + " x=" + fmt(x) + " y=" + fmt(y);
        }
    }
    xreg.pass = xreg.worst_slack >= 0.0;
    rep.probes.push_back(xreg);

    if (op.x_independent()) {
        ProbeResult indep{"declared x-independence", true, 0.0, ""};
        indep.pass = lip_a <= 1e-12;
        if (!indep.pass) indep.witness = "coefficient Lipschitz estimate " + std::to_string(lip_a);
        rep.probes.push_back(indep);
    }
    return rep;
}

}  // namespace gradcon
