#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>

namespace qspec {

using cplx = std::complex<double>;

struct alignas(32) Quat {
    double w = 0, x = 0, y = 0, z = 0;

    constexpr Quat() = default;
    constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    constexpr explicit Quat(double r) : w(r) {}
    // complex numbers embed as span{1, i}
    static constexpr Quat from_complex(cplx c) { return {c.real(), c.imag(), 0, 0}; }
    // p = c1 + j c2, with c1 = w + x i and c2 = y - z i
    static constexpr Quat from_split(cplx c1, cplx c2) { return {c1.real(), c1.imag(), c2.real(), -c2.imag()}; }

    constexpr cplx c1() const { return {w, x}; }
    constexpr cplx c2() const { return {y, -z}; }

    constexpr Quat conj() const { return {w, -x, -y, -z}; }
    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
    constexpr Quat inv() const {
        double n = norm2();
        return {w / n, -x / n, -y / n, -z / n};
    }
    constexpr Quat imag_part() const { return {0, x, y, z}; }

    constexpr Quat& operator+=(const Quat& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Quat& operator-=(const Quat& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Quat& operator*=(double s) { w *= s; x *= s; y *= s; z *= s; return *this; }
};

constexpr Quat operator+(Quat a, const Quat& b) { return a += b; }
constexpr Quat operator-(Quat a, const Quat& b) { return a -= b; }
constexpr Quat operator-(const Quat& a) { return {-a.w, -a.x, -a.y, -a.z}; }
constexpr Quat operator*(Quat a, double s) { return a *= s; }
constexpr Quat operator*(double s, Quat a) { return a *= s; }
constexpr Quat operator/(Quat a, double s) { return a *= (1.0 / s); }

constexpr Quat operator*(const Quat& p, const Quat& q) {
    return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

// right multiplication by a complex number
inline Quat operator*(const Quat& p, cplx c) { return p * Quat::from_complex(c); }
inline Quat operator*(cplx c, const Quat& p) { return Quat::from_complex(c) * p; }

constexpr bool operator==(const Quat& a, const Quat& b) {
    return a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z;
}

inline constexpr Quat kOne{1, 0, 0, 0};
inline constexpr Quat kI{0, 1, 0, 0};
inline constexpr Quat kJ{0, 0, 1, 0};
inline constexpr Quat kK{0, 0, 0, 1};

inline double dist(const Quat& a, const Quat& b) { return (a - b).norm(); }

// Unit quaternion r with r a r^-1 = b for unit imaginary a, b (b != -a).
Quat rotation_between(const Quat& a, const Quat& b);

// Homogeneous coordinates of a point of HP^1: the line v ℍ.
struct HPoint {
    Quat v0, v1;
    HPoint() = default;
    HPoint(const Quat& a, const Quat& b) : v0(a), v1(b) {}
    double norm() const { return std::sqrt(v0.norm2() + v1.norm2()); }
    HPoint right(const Quat& lam) const { return {v0 * lam, v1 * lam}; }
    HPoint normalized() const { double n = norm(); return {v0 / n, v1 / n}; }
    bool valid() const { return v0.norm2() + v1.norm2() > 0; }
};

// 2x2 quaternionic matrix acting on column vectors of ℍ^2.
struct Mat2H {
    Quat a{1, 0, 0, 0}, b{}, c{}, d{1, 0, 0, 0};

    static Mat2H identity() { return {}; }
    static Mat2H from_columns(const HPoint& p, const HPoint& q) { return {p.v0, q.v0, p.v1, q.v1}; }
    HPoint apply(const HPoint& v) const { return {a * v.v0 + b * v.v1, c * v.v0 + d * v.v1}; }
    HPoint col0() const { return {a, c}; }
    HPoint col1() const { return {b, d}; }
};

Mat2H operator*(const Mat2H& m, const Mat2H& n);
Mat2H operator+(const Mat2H& m, const Mat2H& n);
Mat2H operator*(const Mat2H& m, double s);
double frob_norm(const Mat2H& m);
// Inverse via the Schur complement on whichever diagonal entry is larger.
std::optional<Mat2H> inverse(const Mat2H& m);

// Affine chart of HP^1; nullopt is the infinity marker.
std::optional<Quat> hp1_chart(const HPoint& p, int chart = 0);
HPoint chart_to_hp1(const Quat& q, int chart = 0);
// sin of the largest principal angle between the two lines viewed as real 4-planes in R^8
double hp1_distance(const HPoint& p, const HPoint& q);

using SphereCongruencePoint = Mat2H;

// S = [l m] diag(jl, jm) [l m]^-1, i.e. S l = l jl and S m = m jm.
SphereCongruencePoint sphere_from_splitting(const Quat& jl, const HPoint& l, const Quat& jm, const HPoint& m,
                                            double collapse_tol = 1e-10);

double square_plus_identity_residual(const Mat2H& s);

// Möbius map taking p to the point at infinity (1,0) of the standard chart.
Mat2H frame_sending_to_infinity(const HPoint& p);

}  // namespace qspec
