#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "qspec/quaternion.hpp"

using namespace qspec;

namespace {

// left-multiplication matrix of p on R^4 = span{1, i, j, k}, built from the Hamilton table
Eigen::Matrix4d left_matrix(const Quat& p) {
    Eigen::Matrix4d m;
    m << p.w, -p.x, -p.y, -p.z,
         p.x,  p.w, -p.z,  p.y,
         p.y,  p.z,  p.w, -p.x,
         p.z, -p.y,  p.x,  p.w;
    return m;
}

Eigen::Vector4d vec(const Quat& q) { return {q.w, q.x, q.y, q.z}; }

Quat random_quat(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(-1, 1);
    return {u(g), u(g), u(g), u(g)};
}

// real 8x4 basis of the line v·ℍ
Eigen::Matrix<double, 8, 4> line_basis(const HPoint& p) {
    Eigen::Matrix<double, 8, 4> b;
    const Quat units[4] = {kOne, kI, kJ, kK};
    for (int c = 0; c < 4; ++c) {
        b.block<4, 1>(0, c) = vec(p.v0 * units[c]);
        b.block<4, 1>(4, c) = vec(p.v1 * units[c]);
    }
    return b;
}

}  // namespace

TEST_CASE("unit relations i^2 = j^2 = k^2 = ijk = -1") {
    CHECK(kI * kI == -kOne);
    CHECK(kJ * kJ == -kOne);
    CHECK(kK * kK == -kOne);
    CHECK(kI * kJ * kK == -kOne);
    CHECK(kI * kJ == kK);
    CHECK(kJ * kI == -kK);
}

TEST_CASE("product agrees with the left-multiplication matrix") {
    std::mt19937_64 g(7);
    for (int t = 0; t < 50; ++t) {
        Quat p = random_quat(g), q = random_quat(g);
        CHECK((vec(p * q) - left_matrix(p) * vec(q)).norm() < 1e-14);
        CHECK(std::abs((p * q).norm() - p.norm() * q.norm()) < 1e-14);
        CHECK(((p * p.inv()) - kOne).norm() < 1e-14);
    }
}

TEST_CASE("complex split p = c1 + j c2") {
    cplx c1(0.3, -1.2), c2(2.0, 0.7);
    Quat p = Quat::from_split(c1, c2);
    Quat rebuilt = Quat::from_complex(c1) + kJ * Quat::from_complex(c2);
    CHECK((p - rebuilt).norm() < 1e-15);
    CHECK(p.c1() == c1);
    CHECK(p.c2() == c2);
    // j z = conj(z) j
    cplx z(0.4, 0.9);
    CHECK(((kJ * Quat::from_complex(z)) - (Quat::from_complex(std::conj(z)) * kJ)).norm() < 1e-15);
}

TEST_CASE("rotation_between conjugates a onto b") {
    std::mt19937_64 g(3);
    for (int t = 0; t < 20; ++t) {
        Quat a = random_quat(g).imag_part(), b = random_quat(g).imag_part();
        a = a / a.norm();
        b = b / b.norm();
        Quat r = rotation_between(a, b);
        CHECK(std::abs(r.norm() - 1) < 1e-14);
        CHECK((r * a * r.inv() - b).norm() < 1e-13);
    }
}

TEST_CASE("hp1_distance is the sine of the largest principal angle") {
    std::mt19937_64 g(11);
    for (int t = 0; t < 20; ++t) {
        HPoint p(random_quat(g), random_quat(g)), q(random_quat(g), random_quat(g));
        Eigen::HouseholderQR<Eigen::Matrix<double, 8, 4>> qp(line_basis(p)), qq(line_basis(q));
        Eigen::Matrix<double, 8, 4> A = qp.householderQ() * Eigen::Matrix<double, 8, 4>::Identity();
        Eigen::Matrix<double, 8, 4> B = qq.householderQ() * Eigen::Matrix<double, 8, 4>::Identity();
        Eigen::JacobiSVD<Eigen::Matrix4d> svd(A.transpose() * B);
        double cmin = std::min(1.0, svd.singularValues().minCoeff());
        double expected = std::sqrt(std::max(0.0, 1 - cmin * cmin));
        CHECK(std::abs(hp1_distance(p, q) - expected) < 1e-10);
        CHECK(hp1_distance(p, p.right(random_quat(g))) < 1e-7);
    }
}

TEST_CASE("affine charts round trip and mark infinity") {
    Quat q(0.5, -0.25, 1.5, 2.0);
    auto back = hp1_chart(chart_to_hp1(q));
    REQUIRE(back);
    CHECK((*back - q).norm() < 1e-14);
    CHECK_FALSE(hp1_chart(HPoint(kOne, Quat())).has_value());
}

TEST_CASE("Mat2H inverse and Moebius normalization") {
    std::mt19937_64 g(5);
    Mat2H m{random_quat(g), random_quat(g), random_quat(g), random_quat(g)};
    auto mi = inverse(m);
    REQUIRE(mi);
    CHECK(frob_norm(m * *mi + Mat2H::identity() * -1.0) < 1e-12);
    HPoint p(random_quat(g), random_quat(g));
    HPoint sent = frame_sending_to_infinity(p).apply(p);
    CHECK(hp1_distance(sent, HPoint(kOne, Quat())) < 1e-12);
    Mat2H singular{kOne, kI, kOne, kI};
    CHECK_FALSE(inverse(singular).has_value());
}

TEST_CASE("sphere_from_splitting squares to -1 and fixes both lines") {
    std::mt19937_64 g(9);
    HPoint l(random_quat(g), random_quat(g)), m(random_quat(g), random_quat(g));
    Quat jl(0, 0.6, 0, 0.8), jm(0, 0, 1, 0);
    Mat2H S = sphere_from_splitting(jl, l, jm, m);
    CHECK(square_plus_identity_residual(S) < 1e-12);
    CHECK(hp1_distance(S.apply(l), l) < 1e-7);
    CHECK(hp1_distance(S.apply(m), m) < 1e-7);
    HPoint sl = S.apply(l), ljl = l.right(jl);
    CHECK((sl.v0 - ljl.v0).norm() + (sl.v1 - ljl.v1).norm() < 1e-12);
    CHECK_THROWS(sphere_from_splitting(jl, l, jm, l));
}
