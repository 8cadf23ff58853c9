#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "consyn/errors.hpp"

namespace consyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Kronecker product A ⊗ B.
inline MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline bool is_square(const MatrixXd& m) { return m.rows() == m.cols(); }

inline void require(bool cond, const std::string& what) {
    if (!cond) throw DimensionMismatch(what);
}

inline bool approx_symmetric(const MatrixXd& m, double tol = 1e-10) {
    if (!is_square(m)) return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Largest real part over the spectrum of a square matrix.
inline double max_real_eigenvalue(const MatrixXd& a) {
    Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue_sym(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double spectral_norm(const MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace consyn
