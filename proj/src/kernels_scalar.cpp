#include <algorithm>
#include <cmath>

#include "qspec/kernels.hpp"

namespace qspec::kernels::scalar {

void qmul(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

void qdivl(const Quat* a, const Quat* b, Quat* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k].inv() * b[k];
}

void diff_scale(const double* p, const double* m, double s, double* out, std::size_t len) {
    for (std::size_t k = 0; k < len; ++k) out[k] = (p[k] - m[k]) * s;
}

double max_norm(const Quat* a, std::size_t n) {
    double r = 0;
    for (std::size_t k = 0; k < n; ++k) r = std::max(r, a[k].norm2());
    return std::sqrt(r);
}

}  // namespace qspec::kernels::scalar
