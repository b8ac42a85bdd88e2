#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradcon/linalg.hpp"

namespace gradcon {

using CoefficientField = std::function<SymMat(const Vec& x)>;
using DiffusionField = std::function<Mat(const Vec& x, double z)>;

enum class OperatorKind { Linear, BellmanMax, DiffusionSup };

/// Declared structural constants. Unset values are measured by validate().
struct StructuralConstants {
    std::optional<double> lambda;
    std::optional<double> Lambda;
    std::optional<double> upsilon;
};

/// F(M, x) in one of three convex, uniformly elliptic forms:
///   Linear:        -a(x) . M
///   BellmanMax:    max_k -a_k(x) . M
///   DiffusionSup:  max_{z in U} -1/2 sigma(x,z) sigma(x,z)^t . M
///
/// Each form is a finite maximum of linear branches -a_k(x) . M; the branch list is what the
/// discretisation consumes. Symmetric storage of M makes the symmetrised extension of F trivial.
class EllipticOperator {
public:
    static EllipticOperator linear(int dim, CoefficientField a, bool x_independent = false,
                                   StructuralConstants declared = {});
    static EllipticOperator bellman_max(int dim, std::vector<CoefficientField> branches, bool x_independent = false,
                                        StructuralConstants declared = {});
    static EllipticOperator diffusion_sup(int dim, DiffusionField sigma, std::vector<double> controls,
                                          bool x_independent = false, StructuralConstants declared = {});

    OperatorKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int branch_count() const { return static_cast<int>(branches_.size()); }
    bool x_independent() const { return x_independent_; }
    const StructuralConstants& declared() const { return declared_; }
    const std::vector<double>& controls() const { return controls_; }

    /// a_k(x) for branch k.
    SymMat coefficient(int k, const Vec& x) const { return branches_[k](x); }

    /// Diffusion matrix of branch k: sigma(x, z_k) for DiffusionSup, the symmetric root of
    /// 2 a_k(x) otherwise, so that 1/2 sigma sigma^t = a_k.
    Mat diffusion(int k, const Vec& x) const;

    double eval(const SymMat& m, const Vec& x) const;
    /// Index of the maximising branch; ties go to the smallest index.
    int argmax_branch(const SymMat& m, const Vec& x) const;
    /// dF/dM_ij at (M, x): -a_k(x) of the maximising branch.
    SymMat linearize(const SymMat& m, const Vec& x) const;

    std::string name() const;

private:
    EllipticOperator(OperatorKind kind, int dim, std::vector<CoefficientField> branches, bool x_independent,
                     StructuralConstants declared);

    OperatorKind kind_;
    int dim_;
    std::vector<CoefficientField> branches_;
    DiffusionField sigma_;
    std::vector<double> controls_;
    bool x_independent_;
    StructuralConstants declared_;
};

/// Outcome of one structural probe.
struct ProbeResult {
    std::string hypothesis;
    bool pass = true;
    double worst_slack = 0.0;  // most negative margin observed (>= 0 when passing)
    std::string witness;       // violating (M, N, x, y) tuple, when failing
};

struct ValidationReport {
    double lambda = 0.0;   // measured min eigenvalue over branches and sample points
    double Lambda = 0.0;   // measured max eigenvalue
    double upsilon = 0.0;  // constant used for the x-regularity probe (declared or measured)
    double omega_coefficient = 0.0;  // omega(r) = c r
    std::vector<ProbeResult> probes;

    bool passed() const;
    /// Throws ValidationFailure naming the first failing hypothesis and its witness.
    void throw_if_failed() const;
};

/// Probes uniform ellipticity, convexity in M and x-regularity on the sample set.
/// Requires probes >= 100.
ValidationReport validate(const EllipticOperator& op, std::span<const Vec> domain_sample, int probes,
                          unsigned long long seed = 20240611ULL);

}  // namespace gradcon
