#pragma once

#include <string>

namespace gradcon {

enum class PenaltyFamily {
    /// q(s) = 2 s^3 - s^4 on the blend interval; C^2.
    PolyBlend,
    /// q(s) = s^2 on the blend interval; C^{1,1} (second derivative jumps at 0 and 2 eps).
    ShiftedQuadratic,
};

/// Smooth approximation of z -> (z / eps)^+:
///   beta(z) = 0                for z <= 0
///   beta(z) = q(z / (2 eps))   for 0 < z < 2 eps
///   beta(z) = (z - eps) / eps  for z >= 2 eps
class PenaltyFn {
public:
    PenaltyFn(double eps, PenaltyFamily family = PenaltyFamily::PolyBlend);

    double eps() const { return eps_; }
    PenaltyFamily family() const { return family_; }

    double operator()(double z) const;
    double deriv(double z) const;
    double deriv2(double z) const;

private:
    double eps_;
    PenaltyFamily family_;
};

PenaltyFamily parse_penalty_family(const std::string& name);
std::string to_string(PenaltyFamily f);

}  // namespace gradcon
