#include <doctest.h>

#include <random>
#include <vector>

#include "qspec/kernels.hpp"

using namespace qspec;
namespace k = qspec::kernels;

namespace {

std::vector<Quat> random_quats(std::size_t n, unsigned seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<Quat> v(n);
    for (Quat& q : v) q = {u(g), u(g), u(g), u(g)};
    return v;
}

double max_diff(const std::vector<Quat>& a, const std::vector<Quat>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).norm());
    return d;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference matches the Hamilton product") {
    auto a = random_quats(37, 1), b = random_quats(37, 2);
    std::vector<Quat> out(a.size()), div(a.size());
    k::scalar::qmul(a.data(), b.data(), out.data(), a.size());
    k::scalar::qdivl(a.data(), b.data(), div.data(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((out[i] - a[i] * b[i]).norm() < 1e-14);
        CHECK((a[i] * div[i] - b[i]).norm() < 1e-13);
    }
}

TEST_CASE("active isa honours the environment override") {
    const char* env = std::getenv("QSPEC_SIMD");
    if (env && std::string(env) == "scalar") CHECK(k::active_isa() == k::Isa::Scalar);
    else if (k::avx2_available()) CHECK(k::active_isa() == k::Isa::Avx2);
    MESSAGE("active kernels: " << std::string(k::isa_name(k::active_isa())));
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    if (!k::avx2_available()) {
        MESSAGE("AVX2 not available, skipped");
        return;
    }
    // odd lengths exercise the tails
    for (std::size_t n : {std::size_t(0), std::size_t(1), std::size_t(3), std::size_t(64), std::size_t(1001)}) {
        auto a = random_quats(n, 10 + unsigned(n)), b = random_quats(n, 20 + unsigned(n));
        std::vector<Quat> s(n), v(n);
        k::scalar::qmul(a.data(), b.data(), s.data(), n);
        k::avx2::qmul(a.data(), b.data(), v.data(), n);
        CHECK(max_diff(s, v) <= 1e-14);
        k::scalar::qdivl(a.data(), b.data(), s.data(), n);
        k::avx2::qdivl(a.data(), b.data(), v.data(), n);
        CHECK(max_diff(s, v) <= 1e-13);
        CHECK(k::scalar::max_norm(a.data(), n) == doctest::Approx(k::avx2::max_norm(a.data(), n)).epsilon(1e-15));

        std::vector<double> p(4 * n + 3), m(4 * n + 3), rs(p.size()), rv(p.size());
        std::mt19937_64 g(n);
        std::uniform_real_distribution<double> u(-1, 1);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = u(g), m[i] = u(g);
        k::scalar::diff_scale(p.data(), m.data(), 0.37, rs.data(), p.size());
        k::avx2::diff_scale(p.data(), m.data(), 0.37, rv.data(), p.size());
        double d = 0;
        for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(rs[i] - rv[i]));
        CHECK(d == 0.0);
    }
}

TEST_CASE("dispatch can be forced to either path") {
    auto a = random_quats(9, 4), b = random_quats(9, 5);
    std::vector<Quat> s(9), v(9);
    const k::Isa saved = k::active_isa();
    k::force_isa(k::Isa::Scalar);
    k::qmul(a.data(), b.data(), s.data(), 9);
    if (k::avx2_available()) {
        k::force_isa(k::Isa::Avx2);
        k::qmul(a.data(), b.data(), v.data(), 9);
        CHECK(max_diff(s, v) <= 1e-14);
    }
    k::force_isa(saved);
}

}
