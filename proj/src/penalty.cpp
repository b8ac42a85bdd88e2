#include "gradcon/penalty.hpp"

#include "gradcon/errors.hpp"

namespace gradcon {

PenaltyFn::PenaltyFn(double eps, PenaltyFamily family) : eps_(eps), family_(family) {
    if (!(eps > 0.0)) throw InvalidParameter("penalty eps must be positive");
}

double PenaltyFn::operator()(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 2.0 * eps_) return (z - eps_) / eps_;
    const double s = z / (2.0 * eps_);
    if (family_ == PenaltyFamily::ShiftedQuadratic) return s * s;
    return s * s * s * (2.0 - s);
}

double PenaltyFn::deriv(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 2.0 * eps_) return 1.0 / eps_;
    const double s = z / (2.0 * eps_);
    const double dq = family_ == PenaltyFamily::ShiftedQuadratic ? 2.0 * s : s * s * (6.0 - 4.0 * s);
    return dq / (2.0 * eps_);
}

double PenaltyFn::deriv2(double z) const {
    if (z <= 0.0 || z >= 2.0 * eps_) return 0.0;
    const double s = z / (2.0 * eps_);
    const double d2q = family_ == PenaltyFamily::ShiftedQuadratic ? 2.0 : 12.0 * s * (1.0 - s);
    return d2q / (4.0 * eps_ * eps_);
}

PenaltyFamily parse_penalty_family(const std::string& name) {
    if (name == "poly_blend") return PenaltyFamily::PolyBlend;
    if (name == "shifted_quadratic") return PenaltyFamily::ShiftedQuadratic;
    throw InvalidParameter("unknown penalty family '" + name + "'");
}

std::string to_string(PenaltyFamily f) {
    return f == PenaltyFamily::PolyBlend ? "poly_blend" : "shifted_quadratic";
}

}  // namespace gradcon
