#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "geogns/rng.hpp"
#include "geogns/tensor.hpp"

namespace testsupport {

using geogns::Index;
using geogns::Matrix;

inline Matrix gaussian(Index rows, Index cols, std::uint64_t key) {
    geogns::CounterRng rng(key);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    }
    return m;
}

inline Matrix orthonormal(Index rows, Index cols, std::uint64_t key) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(rows, cols, key));
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

// rows x cols with singular values spread over [1, cond].
inline Matrix conditioned(Index rows, Index cols, double cond, std::uint64_t key) {
    const Index r = std::min(rows, cols);
    const Matrix u = orthonormal(rows, r, geogns::combine_keys(key, 1));
    const Matrix v = orthonormal(cols, r, geogns::combine_keys(key, 2));
    Eigen::VectorXd s(r);
    for (Index i = 0; i < r; ++i) {
        s(i) = r == 1 ? 1.0 : 1.0 + (cond - 1.0) * static_cast<double>(i) / static_cast<double>(r - 1);
    }
    return u * s.asDiagonal() * v.transpose();
}

// Singular values as square roots of the eigenvalues of the smaller Gram matrix.
inline Eigen::VectorXd singular_values_via_gram(const Matrix& g) {
    const Matrix gram = g.rows() <= g.cols() ? Matrix(g * g.transpose()) : Matrix(g.transpose() * g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

inline double nuclear_via_gram(const Matrix& g) { return singular_values_via_gram(g).sum(); }

// Polar factor G (G^T G)^{-1/2} for full-column-rank G, or its transpose form.
inline Matrix polar_factor(const Matrix& g) {
    if (g.rows() >= g.cols()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g.transpose() * g);
        const Matrix inv_sqrt = es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
        return g * inv_sqrt;
    }
    return polar_factor(g.transpose()).transpose();
}

inline double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testsupport
