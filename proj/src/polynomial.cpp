#include "gradcon/polynomial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "gradcon/errors.hpp"

namespace gradcon {

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Polynomial::Term term() {
        Polynomial::Term t{1.0, 0, 0, 0};
        factor(t);
        while (peek() == '*') {
            ++pos_;
            factor(t);
        }
        return t;
    }

    char peek() {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    void advance() { ++pos_; }
    bool done() { return peek() == '\0'; }

    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidParameter("polynomial '" + std::string(s_) + "': " + what + " at column " +
                               std::to_string(pos_ + 1));
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void factor(Polynomial::Term& t) {
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            t.coef *= number();
            return;
        }
        int* power = nullptr;
        if (s_.substr(pos_, 2) == "x1") {
            power = &t.px1;
            pos_ += 2;
        } else if (s_.substr(pos_, 2) == "x2") {
            power = &t.px2;
            pos_ += 2;
        } else if (c == 'z') {
            power = &t.pz;
            pos_ += 1;
        } else {
            fail("expected number, x1, x2 or z");
        }
        int e = 1;
        if (peek() == '^') {
            ++pos_;
            skip();
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected integer exponent");
            e = std::stoi(std::string(s_.substr(start, pos_ - start)));
        }
        *power += e;
    }

    double number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
                s_[pos_] == 'E' ||
                ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        double v = 0.0;
        const auto* first = s_.data() + start;
        const auto res = std::from_chars(first, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

Polynomial Polynomial::parse(std::string_view text) {
    Parser p(text);
    Polynomial poly;
    if (p.done()) p.fail("empty expression");
    double sign = 1.0;
    if (p.peek() == '+' || p.peek() == '-') {
        sign = p.peek() == '-' ? -1.0 : 1.0;
        p.advance();
    }
    for (;;) {
        Term t = p.term();
        t.coef *= sign;
        poly.terms_.push_back(t);
        if (p.done()) break;
        const char c = p.peek();
        if (c != '+' && c != '-') p.fail("expected '+' or '-'");
        sign = c == '-' ? -1.0 : 1.0;
        p.advance();
    }
    return poly;
}

double Polynomial::operator()(const Vec& x, double z) const {
    const double x1 = x.dim() > 0 ? x[0] : 0.0;
    const double x2 = x.dim() > 1 ? x[1] : 0.0;
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * ipow(x1, t.px1) * ipow(x2, t.px2) * ipow(z, t.pz);
    return s;
}

bool Polynomial::depends_on_x() const {
    for (const auto& t : terms_)
        if (t.coef != 0.0 && (t.px1 > 0 || t.px2 > 0)) return true;
    return false;
}

bool Polynomial::depends_on_z() const {
    for (const auto& t : terms_)
        if (t.coef != 0.0 && t.pz > 0) return true;
    return false;
}

std::string Polynomial::to_string() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) os << (t.coef < 0 ? " - " : " + ");
        else if (t.coef < 0) os << "-";
        first = false;
        os << std::abs(t.coef);
        if (t.px1) os << "*x1^" << t.px1;
        if (t.px2) os << "*x2^" << t.px2;
        if (t.pz) os << "*z^" << t.pz;
    }
    if (first) os << "0";
    return os.str();
}

}  // namespace gradcon
