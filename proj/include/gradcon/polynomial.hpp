#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gradcon/linalg.hpp"

namespace gradcon {

/// Polynomial in the variables x1, x2 and the control value z.
///
/// Grammar (whitespace ignored):
///   poly   := ['+'|'-'] term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := number | var ['^' digits]
///   var    := 'x1' | 'x2' | 'z'
class Polynomial {
public:
    struct Term {
        double coef = 0.0;
        int px1 = 0;
        int px2 = 0;
        int pz = 0;
    };

    Polynomial() = default;
    explicit Polynomial(double constant) : terms_{{constant, 0, 0, 0}} {}

    /// Throws InvalidParameter with the offending column on malformed input.
    static Polynomial parse(std::string_view text);

    double operator()(const Vec& x, double z = 0.0) const;

    bool depends_on_x() const;
    bool depends_on_z() const;
    const std::vector<Term>& terms() const { return terms_; }
    std::string to_string() const;

private:
    std::vector<Term> terms_;
};

}  // namespace gradcon
