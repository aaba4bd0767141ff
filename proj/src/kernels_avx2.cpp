#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "qspec/kernels.hpp"

#define QSPEC_AVX2 __attribute__((target("avx2,fma")))

namespace qspec::kernels::avx2 {

namespace {

// One quaternion per register, lanes (w, x, y, z).
// p q = p.w (q) + p.x (-x, w, -z, y) + p.y (-y, z, w, -x) + p.z (-z, -y, x, w)
QSPEC_AVX2 inline __m256d mul1(__m256d p, __m256d q) {
    const __m256d s1 = _mm256_setr_pd(-0.0, 0.0, -0.0, 0.0);
    const __m256d s2 = _mm256_setr_pd(-0.0, 0.0, 0.0, -0.0);
    const __m256d s3 = _mm256_setr_pd(-0.0, -0.0, 0.0, 0.0);
    __m256d pw = _mm256_permute4x64_pd(p, 0x00);
    __m256d px = _mm256_permute4x64_pd(p, 0x55);
    __m256d py = _mm256_permute4x64_pd(p, 0xAA);
    __m256d pz = _mm256_permute4x64_pd(p, 0xFF);
    __m256d q1 = _mm256_xor_pd(_mm256_permute4x64_pd(q, _MM_SHUFFLE(2, 3, 0, 1)), s1);  // (x, w, z, y)
    __m256d q2 = _mm256_xor_pd(_mm256_permute4x64_pd(q, _MM_SHUFFLE(1, 0, 3, 2)), s2);  // (y, z, w, x)
    __m256d q3 = _mm256_xor_pd(_mm256_permute4x64_pd(q, _MM_SHUFFLE(0, 1, 2, 3)), s3);  // (z, y, x, w)
    __m256d r = _mm256_mul_pd(pw, q);
    r = _mm256_fmadd_pd(px, q1, r);
    r = _mm256_fmadd_pd(py, q2, r);
    r = _mm256_fmadd_pd(pz, q3, r);
    return r;
}

QSPEC_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

QSPEC_AVX2 void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    const double* pa = &a->w;
    const double* pb = &b->w;
    double* po = &out->w;
    for (std::size_t k = 0; k < n; ++k) {
        __m256d p = _mm256_loadu_pd(pa + 4 * k), q = _mm256_loadu_pd(pb + 4 * k);
        _mm256_storeu_pd(po + 4 * k, mul1(p, q));
    }
}

QSPEC_AVX2 void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    const __m256d cs = _mm256_setr_pd(0.0, -0.0, -0.0, -0.0);
    const double* pa = &a->w;
    const double* pb = &b->w;
    double* po = &out->w;
    for (std::size_t k = 0; k < n; ++k) {
        __m256d p = _mm256_loadu_pd(pa + 4 * k), q = _mm256_loadu_pd(pb + 4 * k);
        double n2 = hsum(_mm256_mul_pd(p, p));
        __m256d inv = _mm256_div_pd(_mm256_xor_pd(p, cs), _mm256_set1_pd(n2));
        _mm256_storeu_pd(po + 4 * k, mul1(inv, q));
    }
}

QSPEC_AVX2 void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t k = 0;
    for (; k + 4 <= len; k += 4)
        _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(p + k), _mm256_loadu_pd(m + k)), vs));
    for (; k < len; ++k) out[k] = (p[k] - m[k]) * s;
}

QSPEC_AVX2 double max_norm(const Quat* a, std::size_t n) {
    const double* pa = &a->w;
    double r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        __m256d v = _mm256_loadu_pd(pa + 4 * k);
        r = std::max(r, hsum(_mm256_mul_pd(v, v)));
    }
    return std::sqrt(r);
}

}  // namespace qspec::kernels::avx2
