#include "qspec/quaternion.hpp"

#include <algorithm>
#include <stdexcept>

namespace qspec {

Quat rotation_between(const Quat& a, const Quat& b) {
    Quat r = kOne - b * a;
    double n = r.norm();
    if (n < 1e-300) throw std::domain_error("rotation_between: antipodal directions");
    return r / n;
}

Mat2H operator*(const Mat2H& m, const Mat2H& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

Mat2H operator+(const Mat2H& m, const Mat2H& n) { return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d}; }

Mat2H operator*(const Mat2H& m, double s) { return {m.a * s, m.b * s, m.c * s, m.d * s}; }

double frob_norm(const Mat2H& m) { return std::sqrt(m.a.norm2() + m.b.norm2() + m.c.norm2() + m.d.norm2()); }

std::optional<Mat2H> inverse(const Mat2H& m) {
    double scale = frob_norm(m);
    if (scale == 0) return std::nullopt;
    const double eps = 1e-14 * scale;
    if (m.a.norm() >= m.d.norm()) {
        if (m.a.norm() < eps) return std::nullopt;
        Quat ai = m.a.inv();
        Quat s = m.d - m.c * ai * m.b;
        if (s.norm() < eps) return std::nullopt;
        Quat si = s.inv();
        Quat aib = ai * m.b, cai = m.c * ai;
        return Mat2H{ai + aib * si * cai, -(aib * si), -(si * cai), si};
    }
    if (m.d.norm() < eps) return std::nullopt;
    Quat di = m.d.inv();
    Quat s = m.a - m.b * di * m.c;
    if (s.norm() < eps) return std::nullopt;
    Quat si = s.inv();
    Quat dic = di * m.c, bdi = m.b * di;
    return Mat2H{si, -(si * bdi), -(dic * si), di + dic * si * bdi};
}

std::optional<Quat> hp1_chart(const HPoint& p, int chart) {
    const Quat& num = chart == 0 ? p.v0 : p.v1;
    const Quat& den = chart == 0 ? p.v1 : p.v0;
    if (den.norm() <= 1e-300 * std::max(1.0, num.norm())) return std::nullopt;
    return num * den.inv();
}

HPoint chart_to_hp1(const Quat& q, int chart) { return chart == 0 ? HPoint{q, kOne} : HPoint{kOne, q}; }

double hp1_distance(const HPoint& p, const HPoint& q) {
    HPoint a = p.normalized(), b = q.normalized();
    // all four principal angles between quaternionic lines coincide
    Quat h = a.v0.conj() * b.v0 + a.v1.conj() * b.v1;
    Quat r0 = b.v0 - a.v0 * h, r1 = b.v1 - a.v1 * h;
    return std::min(1.0, std::sqrt(r0.norm2() + r1.norm2()));
}

SphereCongruencePoint sphere_from_splitting(const Quat& jl, const HPoint& l, const Quat& jm, const HPoint& m,
                                            double collapse_tol) {
    if (hp1_distance(l, m) < collapse_tol) throw std::domain_error("splitting collapsed");
    Mat2H basis = Mat2H::from_columns(l, m);
    auto bi = inverse(basis);
    if (!bi) throw std::domain_error("splitting collapsed");
    Mat2H diag{jl, Quat{}, Quat{}, jm};
    return basis * diag * *bi;
}

double square_plus_identity_residual(const Mat2H& s) {
    Mat2H sq = s * s;
    sq.a += kOne;
    sq.d += kOne;
    return frob_norm(sq);
}

Mat2H frame_sending_to_infinity(const HPoint& p) {
    HPoint n = p.normalized();
    HPoint e = n.v0.norm() >= n.v1.norm() ? HPoint{Quat{}, kOne} : HPoint{kOne, Quat{}};
    auto inv = inverse(Mat2H::from_columns(n, e));
    if (!inv) throw std::domain_error("frame_sending_to_infinity: degenerate point");
    return *inv;
}

}  // namespace qspec
