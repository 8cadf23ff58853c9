#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

#include "consyn/errors.hpp"
#include "consyn/matrix_utils.hpp"

namespace consyn {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Margin separating structurally marginal modes from numerical noise.
inline constexpr double kStabilityMargin = 1e-8;

/// Continuous-time state-space system dx = Ax + Bw, y = Cx + Dw.
struct LtiSystem {
    MatrixXd A, B, C, D;

    LtiSystem() = default;
    LtiSystem(MatrixXd a, MatrixXd b, MatrixXd c)
        : LtiSystem(std::move(a), std::move(b), std::move(c), MatrixXd()) {}
    LtiSystem(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        if (D.size() == 0) D = MatrixXd::Zero(C.rows(), B.cols());
        require(is_square(A), "LtiSystem: A must be square");
        require(B.rows() == A.rows(), "LtiSystem: B row count");
        require(C.cols() == A.cols(), "LtiSystem: C column count");
        require(D.rows() == C.rows() && D.cols() == B.cols(), "LtiSystem: D shape");
        if (!all_finite(A) || !all_finite(B) || !all_finite(C) || !all_finite(D))
            throw IllFormed("LtiSystem: non-finite entries");
    }

    Eigen::Index order() const { return A.rows(); }
    Eigen::Index n_inputs() const { return B.cols(); }
    Eigen::Index n_outputs() const { return C.rows(); }

    /// Frequency response C (jwI - A)^{-1} B + D.
    MatrixXcd evaluate(double omega) const {
        MatrixXcd m = MatrixXcd::Identity(order(), order()) * std::complex<double>(0.0, omega) -
                      A.cast<std::complex<double>>();
        return C.cast<std::complex<double>>() * m.partialPivLu().solve(B.cast<std::complex<double>>()) +
               D.cast<std::complex<double>>();
    }
};

inline bool is_hurwitz(const MatrixXd& a) {
    require(is_square(a), "is_hurwitz: matrix must be square");
    if (!all_finite(a)) throw IllFormed("is_hurwitz: non-finite entries");
    if (a.rows() == 0) return true;
    return max_real_eigenvalue(a) < -kStabilityMargin;
}

/// Solves A X + X A^T + Q = 0 for symmetric X (Bartels-Stewart on the complex
/// Schur form). A must be Hurwitz.
inline MatrixXd solve_lyapunov(const MatrixXd& a, const MatrixXd& q) {
    require(is_square(a) && is_square(q) && a.rows() == q.rows(), "solve_lyapunov: dimensions");
    if (!approx_symmetric(q, 1e-9)) throw IllFormed("solve_lyapunov: Q must be symmetric");
    if (!is_hurwitz(a)) throw UnstableMatrix("solve_lyapunov: A is not Hurwitz");

    const Eigen::Index n = a.rows();
    Eigen::ComplexSchur<MatrixXd> schur(a, /*computeU=*/true);
    if (schur.info() != Eigen::Success) throw NumericalFailure("solve_lyapunov: Schur failed");
    const MatrixXcd& t = schur.matrixT();
    const MatrixXcd& u = schur.matrixU();

    // T Y + Y T^H = F with F = -U^H Q U, solved entrywise: the divisor
    // t_ii + conj(t_jj) never vanishes for Hurwitz A.
    MatrixXcd f = -u.adjoint() * q.cast<std::complex<double>>() * u;
    MatrixXcd y = MatrixXcd::Zero(n, n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            std::complex<double> rhs = f(i, j);
            for (Eigen::Index k = i + 1; k < n; ++k) rhs -= t(i, k) * y(k, j);
            for (Eigen::Index k = 0; k < j; ++k) rhs -= y(i, k) * std::conj(t(j, k));
            y(i, j) = rhs / (t(i, i) + std::conj(t(j, j)));
        }
    }
    MatrixXd x = (u * y * u.adjoint()).real();
    return symmetrized(x);
}

/// Stabilizing solution of the CARE  A^T X + X A - X G X + Q = 0  via the
/// matrix sign function of the Hamiltonian [A, -G; -Q, -A^T].
/// Returns X with A - G X ... (caller interprets); throws NumericalFailure
/// when the sign iteration does not converge or the subspace solve is
/// singular (no stabilizing solution).
inline MatrixXd solve_care(const MatrixXd& a, const MatrixXd& g, const MatrixXd& q,
                           int max_iter = 100) {
    const Eigen::Index n = a.rows();
    require(is_square(a) && is_square(g) && is_square(q), "solve_care: square blocks");
    require(g.rows() == n && q.rows() == n, "solve_care: dimensions");

    MatrixXd h(2 * n, 2 * n);
    h << a, -g, -q, -a.transpose();

    // Newton iteration for sign(H) with determinant scaling.
    MatrixXd z = h;
    double tol = 1e-13 * std::max(1.0, h.norm());
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::PartialPivLU<MatrixXd> lu(z);
        double det = std::abs(lu.determinant());
        if (!(det > 0.0) || !std::isfinite(det))
            throw NumericalFailure("solve_care: singular iterate in sign iteration");
        double ck = std::pow(det, -1.0 / static_cast<double>(2 * n));
        MatrixXd zs = ck * z;
        MatrixXd znext = 0.5 * (zs + (1.0 / ck) * lu.inverse());
        double delta = (znext - z).norm();
        z = znext;
        if (delta <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalFailure("solve_care: sign iteration did not converge");

    // Stable invariant subspace = range of (I - sign(H))/2; recover X from
    // X * (top rows) = (bottom rows).
    MatrixXd p = 0.5 * (MatrixXd::Identity(2 * n, 2 * n) - z);
    MatrixXd top = p.topRows(n);
    MatrixXd bottom = p.bottomRows(n);
    Eigen::JacobiSVD<MatrixXd> svd(top.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 1e-12 * svd.singularValues()(0))
        throw NumericalFailure("solve_care: invariant subspace has no graph representation");
    MatrixXd x = svd.solve(bottom.transpose()).transpose();
    return symmetrized(x);
}

/// Stabilizing solution Q > 0 of the filter Riccati equation
///   A Q + Q A^T - Q C2^T C2 Q + W0 = 0.
/// Postcondition: A - Q C2^T C2 is Hurwitz. Throws NotDetectable when no
/// stabilizing positive definite solution exists.
inline MatrixXd solve_filter_riccati(const MatrixXd& a, const MatrixXd& c2, const MatrixXd& w0) {
    const Eigen::Index n = a.rows();
    require(is_square(a) && c2.cols() == n, "solve_filter_riccati: dimensions");
    require(is_square(w0) && w0.rows() == n, "solve_filter_riccati: W0 dimensions");
    if (!approx_symmetric(w0, 1e-9)) throw IllFormed("solve_filter_riccati: W0 must be symmetric");

    MatrixXd q;
    try {
        q = solve_care(a.transpose(), c2.transpose() * c2, w0);
    } catch (const NumericalFailure& e) {
        throw NotDetectable(std::string("solve_filter_riccati: ") + e.what());
    }

    MatrixXd residual = a * q + q * a.transpose() - q * c2.transpose() * c2 * q + w0;
    double scale = a.norm() * q.norm() + (q * c2.transpose() * c2 * q).norm() + w0.norm();
    if (residual.norm() > 1e-8 * std::max(1.0, scale))
        throw NotDetectable("solve_filter_riccati: residual check failed");
    MatrixXd closed = a - q * c2.transpose() * c2;
    if (max_real_eigenvalue(closed) >= 0.0)
        throw NotDetectable("solve_filter_riccati: solution is not stabilizing");
    if (min_eigenvalue_sym(q) <= 0.0)
        throw NotDetectable("solve_filter_riccati: solution is not positive definite");
    return q;
}

/// H2 norm sqrt(tr(C X C^T)) with X the controllability Gramian.
inline double h2_norm(const LtiSystem& sys) {
    if (sys.D.size() != 0 && sys.D.cwiseAbs().maxCoeff() > 0.0)
        throw NonzeroFeedthrough("h2_norm: D must be zero");
    if (sys.order() == 0) return 0.0;
    if (!is_hurwitz(sys.A)) throw UnstableMatrix("h2_norm: A is not Hurwitz");
    MatrixXd x = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    double v = (sys.C * x * sys.C.transpose()).trace();
    return std::sqrt(std::max(0.0, v));
}

namespace detail {

// Bounded-real test: for gamma > sigma_max(D), ||G||_inf >= gamma iff the
// associated Hamiltonian has an eigenvalue on the imaginary axis.
inline bool hamiltonian_touches_axis(const LtiSystem& sys, double gamma) {
    const Eigen::Index n = sys.order();
    const Eigen::Index q = sys.n_inputs();
    const Eigen::Index m = sys.n_outputs();
    MatrixXd r = gamma * gamma * MatrixXd::Identity(q, q) - sys.D.transpose() * sys.D;
    Eigen::LLT<MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) return true;  // gamma at/below sigma_max(D)
    MatrixXd rinv_bt = llt.solve(sys.B.transpose());
    MatrixXd rinv_dt = llt.solve(sys.D.transpose());
    MatrixXd abar = sys.A + sys.B * rinv_dt * sys.C;
    MatrixXd h(2 * n, 2 * n);
    h << abar, sys.B * rinv_bt,
        -sys.C.transpose() * (MatrixXd::Identity(m, m) + sys.D * rinv_dt) * sys.C,
        -abar.transpose();
    Eigen::EigenSolver<MatrixXd> es(h, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        auto ev = es.eigenvalues()(i);
        if (std::abs(ev.real()) <= 1e-8 * (1.0 + std::abs(ev))) return true;
    }
    return false;
}

}  // namespace detail

/// H-infinity norm by bisection on the Hamiltonian imaginary-axis test,
/// relative tolerance 1e-6.
inline double hinf_norm(const LtiSystem& sys) {
    if (sys.order() == 0) return spectral_norm(sys.D);
    if (!is_hurwitz(sys.A)) throw UnstableMatrix("hinf_norm: A is not Hurwitz");
    double d_gain = spectral_norm(sys.D);
    if (sys.B.size() == 0 || sys.C.size() == 0 || sys.B.norm() == 0.0 || sys.C.norm() == 0.0)
        return d_gain;

    double lower = d_gain;
    double decay = std::abs(max_real_eigenvalue(sys.A));
    double upper = d_gain + 2.0 * spectral_norm(sys.C) * spectral_norm(sys.B) / decay + 1.0;
    // The bracket above is safe for well-scaled systems; grow it if the test
    // still sees an axis crossing.
    for (int k = 0; k < 60 && detail::hamiltonian_touches_axis(sys, upper); ++k) upper *= 2.0;

    while (upper - lower > 1e-6 * upper) {
        double mid = 0.5 * (lower + upper);
        if (detail::hamiltonian_touches_axis(sys, mid))
            lower = mid;
        else
            upper = mid;
    }
    return 0.5 * (lower + upper);
}

}  // namespace consyn
