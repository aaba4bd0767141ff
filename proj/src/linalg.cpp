#include "qspec/linalg.hpp"

#include <lapacke.h>

#include <vector>

namespace qspec::linalg {

namespace {

lapack_complex_double* lp(CMat& m) { return reinterpret_cast<lapack_complex_double*>(m.data()); }
lapack_complex_double* lp(CVec& v) { return reinterpret_cast<lapack_complex_double*>(v.data()); }

void check(lapack_int info, const char* what) {
    if (info != 0) throw SolverError(std::string(what) + " failed, info=" + std::to_string(info));
}

}  // namespace

RVec singular_values(const CMat& m) {
    if (m.size() == 0) return RVec();
    CMat a = m;
    const lapack_int rows = lapack_int(a.rows()), cols = lapack_int(a.cols());
    RVec s(std::min(rows, cols));
    check(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, lp(a), rows, s.data(), nullptr, 1, nullptr, 1),
          "zgesdd");
    return s.reverse().eval();
}

Svd svd(const CMat& m) {
    CMat a = m;
    const lapack_int rows = lapack_int(a.rows()), cols = lapack_int(a.cols());
    const lapack_int k = std::min(rows, cols);
    RVec s(k);
    CMat u(rows, rows), vt(cols, cols);
    check(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', rows, cols, lp(a), rows, s.data(), lp(u), rows, lp(vt), cols),
          "zgesdd");
    Svd out;
    out.s = s.reverse();
    out.u.resize(rows, k);
    out.v.resize(cols, k);
    for (lapack_int j = 0; j < k; ++j) {
        out.u.col(j) = u.col(k - 1 - j);
        out.v.col(j) = vt.row(k - 1 - j).adjoint();
    }
    return out;
}

Eig eig(const CMat& m, bool want_vectors) {
    Eig out;
    const lapack_int n = lapack_int(m.rows());
    if (n == 0) return out;
    CMat a = m;
    out.values.resize(n);
    if (want_vectors) out.vectors.resize(n, n);
    check(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, lp(a), n, lp(out.values), nullptr, 1,
                        want_vectors ? lp(out.vectors) : nullptr, n),
          "zgeev");
    return out;
}

GenEig gen_eig(const CMat& a0, const CMat& b0, bool want_vectors) {
    GenEig out;
    const lapack_int n = lapack_int(a0.rows());
    if (n == 0) return out;
    CMat a = a0, b = b0;
    out.alpha.resize(n);
    out.beta.resize(n);
    if (want_vectors) out.vectors.resize(n, n);
    check(LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, lp(a), n, lp(b), n, lp(out.alpha),
                        lp(out.beta), nullptr, 1, want_vectors ? lp(out.vectors) : nullptr, n),
          "zggev");
    return out;
}

double inf_norm(const CMat& m) {
    double r = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) r = std::max(r, m.row(i).cwiseAbs().sum());
    return r;
}

}  // namespace qspec::linalg
