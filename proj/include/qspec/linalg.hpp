#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace qspec {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace linalg {

// ascending order
RVec singular_values(const CMat& m);

struct Svd {
    RVec s;  // ascending
    CMat u;  // left singular vectors, columns matching s
    CMat v;  // right singular vectors, columns matching s
};
Svd svd(const CMat& m);

struct Eig {
    CVec values;
    CMat vectors;  // right eigenvectors when requested
};
Eig eig(const CMat& m, bool want_vectors);

struct GenEig {
    CVec alpha, beta;  // eigenvalue = alpha / beta
    CMat vectors;
};
// A x = lambda B x
GenEig gen_eig(const CMat& a, const CMat& b, bool want_vectors);

// max absolute row sum
double inf_norm(const CMat& m);

}  // namespace linalg
}  // namespace qspec
