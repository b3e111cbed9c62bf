#pragma once

// Tiny fixed-size linear algebra over Real. Row-vector convention:
// states multiply matrices from the left, x' = x * M.

#include <array>
#include <utility>

#include "parrondo/real.hpp"

namespace parrondo {

struct Vec3 {
    std::array<Real, 3> e;

    Vec3(Real a, Real b, Real c) : e{std::move(a), std::move(b), std::move(c)} {}

    static Vec3 zero(long bits) { return Vec3(Real(bits), Real(bits), Real(bits)); }

    Real& operator[](int i) { return e[static_cast<std::size_t>(i)]; }
    const Real& operator[](int i) const { return e[static_cast<std::size_t>(i)]; }

    Real sum() const { return e[0] + e[1] + e[2]; }

    friend Vec3 operator+(const Vec3& a, const Vec3& b) {
        return Vec3(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
    }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) {
        return Vec3(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    }
    friend Vec3 operator*(const Vec3& a, const Real& s) {
        return Vec3(a[0] * s, a[1] * s, a[2] * s);
    }
    friend Vec3 operator/(const Vec3& a, const Real& s) {
        return Vec3(a[0] / s, a[1] / s, a[2] / s);
    }

    friend Real dot(const Vec3& a, const Vec3& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    }

    friend Real linf_dist(const Vec3& a, const Vec3& b) {
        Real d0 = abs(a[0] - b[0]);
        Real d1 = abs(a[1] - b[1]);
        Real d2 = abs(a[2] - b[2]);
        if (d1 > d0) d0 = d1;
        if (d2 > d0) d0 = d2;
        return d0;
    }
};

struct Mat3 {
    // row-major
    std::array<Real, 9> e;

    explicit Mat3(std::array<Real, 9> entries) : e(std::move(entries)) {}

    static Mat3 identity(long bits) {
        Real one = Real::from_long(1, bits);
        Real z = Real(bits);
        return Mat3({one, z, z, z, one, z, z, z, one});
    }
    static Mat3 zero(long bits) {
        Real z = Real(bits);
        return Mat3({z, z, z, z, z, z, z, z, z});
    }
    static Mat3 diag(const Real& a, const Real& b, const Real& c) {
        long bits = std::max({a.precision(), b.precision(), c.precision()});
        Real z = Real(bits);
        return Mat3({a, z, z, z, b, z, z, z, c});
    }

    Real& at(int r, int c) { return e[static_cast<std::size_t>(3 * r + c)]; }
    const Real& at(int r, int c) const { return e[static_cast<std::size_t>(3 * r + c)]; }

    Vec3 row(int r) const { return Vec3(at(r, 0), at(r, 1), at(r, 2)); }
    Vec3 col(int c) const { return Vec3(at(0, c), at(1, c), at(2, c)); }

    friend Vec3 operator*(const Vec3& x, const Mat3& m) {
        return Vec3(x[0] * m.at(0, 0) + x[1] * m.at(1, 0) + x[2] * m.at(2, 0),
                    x[0] * m.at(0, 1) + x[1] * m.at(1, 1) + x[2] * m.at(2, 1),
                    x[0] * m.at(0, 2) + x[1] * m.at(1, 2) + x[2] * m.at(2, 2));
    }

    friend Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r = Mat3::zero(std::max(a.at(0, 0).precision(), b.at(0, 0).precision()));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Real s = a.at(i, 0) * b.at(0, j);
                s += a.at(i, 1) * b.at(1, j);
                s += a.at(i, 2) * b.at(2, j);
                r.at(i, j) = std::move(s);
            }
        return r;
    }

    friend Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 r = a;
        for (std::size_t i = 0; i < 9; ++i) r.e[i] += b.e[i];
        return r;
    }

    friend Mat3 operator-(const Mat3& a, const Mat3& b) {
        Mat3 r = a;
        for (std::size_t i = 0; i < 9; ++i) r.e[i] -= b.e[i];
        return r;
    }

    friend Mat3 operator*(const Mat3& a, const Real& s) {
        Mat3 r = a;
        for (std::size_t i = 0; i < 9; ++i) r.e[i] *= s;
        return r;
    }

    Real det() const {
        return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
               at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
               at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    }

    /// Inverse via the adjugate; throws on a vanishing determinant.
    Mat3 inverse() const {
        Real d = det();
        if (d.is_zero()) throw NumericError("singular matrix");
        Mat3 adj = Mat3::zero(at(0, 0).precision());
        adj.at(0, 0) = at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
        adj.at(0, 1) = at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2);
        adj.at(0, 2) = at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1);
        adj.at(1, 0) = at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2);
        adj.at(1, 1) = at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0);
        adj.at(1, 2) = at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2);
        adj.at(2, 0) = at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0);
        adj.at(2, 1) = at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1);
        adj.at(2, 2) = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        for (std::size_t i = 0; i < 9; ++i) adj.e[i] /= d;
        return adj;
    }

    friend Real max_abs_diff(const Mat3& a, const Mat3& b) {
        Real m = abs(a.e[0] - b.e[0]);
        for (std::size_t i = 1; i < 9; ++i) {
            Real d = abs(a.e[i] - b.e[i]);
            if (d > m) m = d;
        }
        return m;
    }
};

/// Integer matrix power by repeated multiplication. Used as the slow oracle
/// against the spectral closed form.
inline Mat3 matrix_power_naive(const Mat3& m, long n) {
    long bits = m.at(0, 0).precision();
    Mat3 r = Mat3::identity(bits);
    for (long i = 0; i < n; ++i) r = r * m;
    return r;
}

} // namespace parrondo
