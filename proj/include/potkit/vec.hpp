#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace potkit {

/// Small fixed-capacity point in R^n, n <= kMaxDim. Used for interior points
/// (n = N) and boundary-plane points (n = N-1) alike.
struct Vec {
    static constexpr int kMaxDim = 8;

    std::array<double, kMaxDim> c{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
    Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
        assert(n <= kMaxDim);
        int i = 0;
        for (double x : xs) c[i++] = x;
    }

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }
    int dim() const { return n; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) c[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

    double norm2() const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += c[i] * c[i];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a.c[i] * b.c[i];
    return s;
}

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Embed a boundary-plane point z in R^{N-1} as (z, 0) in R^N.
inline Vec lift(const Vec& z) {
    Vec x(z.n + 1);
    for (int i = 0; i < z.n; ++i) x[i] = z[i];
    x[z.n] = 0.0;
    return x;
}

/// Tangential part of an interior half-space point.
inline Vec tangential(const Vec& x) {
    Vec z(x.n - 1);
    for (int i = 0; i + 1 < x.n; ++i) z[i] = x[i];
    return z;
}

}  // namespace potkit
