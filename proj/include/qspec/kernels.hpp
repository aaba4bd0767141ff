#pragma once

#include <cstddef>

#include "qspec/quaternion.hpp"

namespace qspec::kernels {

enum class Isa { Scalar, Avx2 };

// Selected once from CPUID; QSPEC_SIMD=scalar in the environment forces the reference path.
Isa active_isa();
void force_isa(Isa isa);
bool avx2_available();
const char* isa_name(Isa isa);

// out[k] = a[k] * b[k]
void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n);
// out[k] = a[k]^-1 * b[k]
void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n);
// out[k] = (p[k] - m[k]) * s over raw doubles
void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len);
// max_k |a[k]|
double max_norm(const Quat* a, std::size_t n);

namespace scalar {
void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n);
void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n);
void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len);
double max_norm(const Quat* a, std::size_t n);
}  // namespace scalar

namespace avx2 {
void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n);
void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n);
void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len);
double max_norm(const Quat* a, std::size_t n);
}  // namespace avx2

}  // namespace qspec::kernels
