#include "qspec/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace qspec::kernels {

namespace {

Isa detect() {
    const char* env = std::getenv("QSPEC_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& selected() {
    static std::atomic<int> isa{int(detect())};
    return isa;
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() { return Isa(selected().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
    selected().store(int(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    if (active_isa() == Isa::Avx2) avx2::qmul(a, b, out, n);
    else scalar::qmul(a, b, out, n);
}

void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    if (active_isa() == Isa::Avx2) avx2::qdivl(a, b, out, n);
    else scalar::qdivl(a, b, out, n);
}

void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len) {
    if (active_isa() == Isa::Avx2) avx2::diff_scale(p, m, s, out, len);
    else scalar::diff_scale(p, m, s, out, len);
}

double max_norm(const Quat* a, std::size_t n) {
    return active_isa() == Isa::Avx2 ? avx2::max_norm(a, n) : scalar::max_norm(a, n);
}

}  // namespace qspec::kernels
