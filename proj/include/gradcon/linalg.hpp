#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <utility>

namespace gradcon {

inline constexpr int kMaxDim = 2;

/// Point or direction in R^n with n in {1, 2}.
class Vec {
public:
    Vec() = default;
    explicit Vec(int n) : n_(n) { assert(n >= 1 && n <= kMaxDim); }
    Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
        assert(n_ >= 1 && n_ <= kMaxDim);
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }

    int dim() const { return n_; }
    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator-(Vec a) { return a *= -1.0; }
    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

private:
    int n_ = 0;
    std::array<double, kMaxDim> v_{};
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Symmetric n x n matrix; only the upper triangle is stored.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int n) : n_(n) { assert(n >= 1 && n <= kMaxDim); }
    SymMat(double a11) : n_(1), a11_(a11) {}
    SymMat(double a11, double a12, double a22) : n_(2), a11_(a11), a12_(a12), a22_(a22) {}

    static SymMat identity(int n) { return n == 1 ? SymMat(1.0) : SymMat(1.0, 0.0, 1.0); }
    static SymMat zero(int n) { return SymMat(n); }
    static SymMat diag(const Vec& d) { return d.dim() == 1 ? SymMat(d[0]) : SymMat(d[0], 0.0, d[1]); }

    int dim() const { return n_; }
    double operator()(int i, int j) const {
        if (i == 0 && j == 0) return a11_;
        if (i == 1 && j == 1) return a22_;
        return a12_;
    }
    double a11() const { return a11_; }
    double a12() const { return a12_; }
    double a22() const { return a22_; }
    void set(int i, int j, double v) {
        if (i == 0 && j == 0) a11_ = v;
        else if (i == 1 && j == 1) a22_ = v;
        else a12_ = v;
    }

    double trace() const { return n_ == 1 ? a11_ : a11_ + a22_; }
    double frobenius() const { return std::sqrt(inner(*this, *this)); }

    /// Trace inner product A . B = sum_ij A_ij B_ij.
    friend double inner(const SymMat& a, const SymMat& b) {
        if (a.n_ == 1) return a.a11_ * b.a11_;
        return a.a11_ * b.a11_ + 2.0 * a.a12_ * b.a12_ + a.a22_ * b.a22_;
    }

    Vec apply(const Vec& x) const {
        if (n_ == 1) return Vec{a11_ * x[0]};
        return Vec{a11_ * x[0] + a12_ * x[1], a12_ * x[0] + a22_ * x[1]};
    }

    /// Eigenvalues in ascending order (second entry equals first when n = 1).
    std::pair<double, double> eigenvalues() const {
        if (n_ == 1) return {a11_, a11_};
        const double mean = 0.5 * (a11_ + a22_);
        const double rad = std::hypot(0.5 * (a11_ - a22_), a12_);
        return {mean - rad, mean + rad};
    }
    double min_eigenvalue() const { return eigenvalues().first; }
    double max_eigenvalue() const { return eigenvalues().second; }

    SymMat& operator+=(const SymMat& o) {
        a11_ += o.a11_;
        a12_ += o.a12_;
        a22_ += o.a22_;
        return *this;
    }
    SymMat& operator-=(const SymMat& o) {
        a11_ -= o.a11_;
        a12_ -= o.a12_;
        a22_ -= o.a22_;
        return *this;
    }
    SymMat& operator*=(double s) {
        a11_ *= s;
        a12_ *= s;
        a22_ *= s;
        return *this;
    }
    friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
    friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
    friend SymMat operator*(SymMat a, double s) { return a *= s; }
    friend SymMat operator*(double s, SymMat a) { return a *= s; }
    friend SymMat operator-(SymMat a) { return a *= -1.0; }
    friend bool operator==(const SymMat& a, const SymMat& b) {
        return a.n_ == b.n_ && a.a11_ == b.a11_ && a.a12_ == b.a12_ && a.a22_ == b.a22_;
    }

private:
    int n_ = 0;
    double a11_ = 0.0;
    double a12_ = 0.0;
    double a22_ = 0.0;
};

/// General (not necessarily symmetric) n x n matrix, row-major.
class Mat {
public:
    Mat() = default;
    explicit Mat(int n) : n_(n) {}
    Mat(double m11) : n_(1) { m_[0] = m11; }
    Mat(double m11, double m12, double m21, double m22) : n_(2), m_{m11, m12, m21, m22} {}

    int dim() const { return n_; }
    double operator()(int i, int j) const { return m_[i * kMaxDim + j]; }
    double& operator()(int i, int j) { return m_[i * kMaxDim + j]; }

    Vec apply(const Vec& x) const {
        Vec y(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    /// M M^t.
    SymMat gram() const {
        SymMat g(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                double s = 0.0;
                for (int k = 0; k < n_; ++k) s += (*this)(i, k) * (*this)(j, k);
                g.set(i, j, s);
            }
        return g;
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }

    friend Mat operator-(const Mat& a, const Mat& b) {
        Mat c(a.n_);
        for (int k = 0; k < kMaxDim * kMaxDim; ++k) c.m_[k] = a.m_[k] - b.m_[k];
        return c;
    }

private:
    int n_ = 0;
    std::array<double, kMaxDim * kMaxDim> m_{};
};

/// Symmetric positive semidefinite square root via the 2x2 eigen-decomposition.
inline SymMat psd_sqrt(const SymMat& a) {
    if (a.dim() == 1) return SymMat(std::sqrt(std::max(a.a11(), 0.0)));
    const auto [l1, l2] = a.eigenvalues();
    const double s1 = std::sqrt(std::max(l1, 0.0));
    const double s2 = std::sqrt(std::max(l2, 0.0));
    if (l2 - l1 <= 1e-15 * (std::abs(l1) + std::abs(l2) + 1.0)) return SymMat(s1, 0.0, s1);
    // sqrt(A) = (A + s1 s2 I) / (s1 + s2) for 2x2 PSD A.
    const double d = s1 + s2;
    return SymMat((a.a11() + s1 * s2) / d, a.a12() / d, (a.a22() + s1 * s2) / d);
}

inline Mat to_mat(const SymMat& s) {
    if (s.dim() == 1) return Mat(s.a11());
    return Mat(s.a11(), s.a12(), s.a12(), s.a22());
}

inline SymMat product_xtx(const SymMat& x, const SymMat& t) {
    // X T X for symmetric X, T.
    const int n = x.dim();
    SymMat r(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) s += x(i, k) * t(k, l) * x(l, j);
            r.set(i, j, s);
        }
    return r;
}

inline SymMat inverse(const SymMat& a) {
    if (a.dim() == 1) return SymMat(1.0 / a.a11());
    const double det = a.a11() * a.a22() - a.a12() * a.a12();
    return SymMat(a.a22() / det, -a.a12() / det, a.a11() / det);
}

}  // namespace gradcon
