#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "consyn/errors.hpp"
#include "consyn/matrix_utils.hpp"

namespace consyn {

/// One affine constraint block F0 + sum_k theta_k F_k >= 0.
struct LmiBlock {
    MatrixXd F0;
    std::vector<std::pair<int, MatrixXd>> terms;  // (variable index, coefficient matrix)

    Eigen::Index dim() const { return F0.rows(); }

    MatrixXd evaluate(const VectorXd& theta) const {
        MatrixXd f = F0;
        for (const auto& [k, fk] : terms) f += theta(k) * fk;
        return f;
    }
};

/// Affine matrix-inequality problem over scalar decision variables theta.
/// Strict inequalities are pre-shifted by the caller (see strictness_shift).
struct LmiProblem {
    int n_vars = 0;
    std::vector<LmiBlock> blocks;
    std::optional<VectorXd> objective;  // minimize objective ^T theta

    void validate() const {
        if (n_vars < 0) throw IllFormed("LmiProblem: negative variable count");
        for (const auto& b : blocks) {
            if (!is_square(b.F0) || !approx_symmetric(b.F0, 1e-9))
                throw IllFormed("LmiProblem: F0 must be square symmetric");
            for (const auto& [k, fk] : b.terms) {
                if (k < 0 || k >= n_vars) throw IllFormed("LmiProblem: variable index out of range");
                if (fk.rows() != b.F0.rows() || fk.cols() != b.F0.cols())
                    throw IllFormed("LmiProblem: coefficient dimension mismatch");
                if (!approx_symmetric(fk, 1e-9)) throw IllFormed("LmiProblem: F_k must be symmetric");
            }
        }
        if (objective && objective->size() != n_vars)
            throw IllFormed("LmiProblem: objective length mismatch");
    }
};

/// Shift turning the paper-style strict "> 0" into ">= eps I".
inline double strictness_shift(const MatrixXd& constant_term) {
    return 1e-7 * (1.0 + constant_term.norm());
}

struct SdpSolution {
    VectorXd theta;
    std::optional<double> objective_value;
    double margin = 0.0;  // smallest eigenvalue over all blocks at theta
};

struct SdpResult {
    bool feasible = false;
    SdpSolution solution;        // valid when feasible
    std::string infeasibility;   // certificate description otherwise
};

struct SdpOptions {
    double gap_tol = 1e-9;           // phase-II relative duality gap
    double margin_resolution = 1e-7; // phase-I margin accuracy (relative to scale)
    double variable_bound = 1e6;     // box |theta_k| <= bound * scale
    int max_outer = 60;
    int max_newton = 50;
};

namespace detail {

struct BarrierWorkspace {
    // Blocks are stored with precomputed term lists; box constraints appended.
    std::vector<LmiBlock> blocks;
    int n_vars = 0;
    double nu = 0.0;  // total barrier parameter (sum of block dims)
};

inline std::optional<double> barrier_value(const BarrierWorkspace& ws, const VectorXd& theta) {
    double val = 0.0;
    for (const auto& b : ws.blocks) {
        Eigen::LLT<MatrixXd> llt(b.evaluate(theta));
        if (llt.info() != Eigen::Success) return std::nullopt;
        MatrixXd l = llt.matrixL();
        for (Eigen::Index i = 0; i < l.rows(); ++i) val -= 2.0 * std::log(l(i, i));
    }
    return val;
}

/// Damped-Newton centering for min mu*c'theta + phi(theta). Returns the
/// improved iterate; theta must be strictly feasible on entry.
inline VectorXd newton_center(const BarrierWorkspace& ws, const VectorXd& c, double mu,
                              VectorXd theta, const SdpOptions& opt) {
    const int m = ws.n_vars;
    for (int iter = 0; iter < opt.max_newton; ++iter) {
        VectorXd g = mu * c;
        MatrixXd h = MatrixXd::Zero(m, m);
        for (const auto& b : ws.blocks) {
            Eigen::LLT<MatrixXd> llt(b.evaluate(theta));
            if (llt.info() != Eigen::Success)
                throw NumericalFailure("solve_sdp: iterate left the cone");
            MatrixXd linv = MatrixXd(llt.matrixL()).triangularView<Eigen::Lower>().solve(
                MatrixXd::Identity(b.dim(), b.dim()));
            std::vector<std::pair<int, MatrixXd>> w;
            w.reserve(b.terms.size());
            for (const auto& [k, fk] : b.terms) {
                MatrixXd wk = linv * fk * linv.transpose();
                g(k) -= wk.trace();
                w.emplace_back(k, std::move(wk));
            }
            for (size_t a = 0; a < w.size(); ++a)
                for (size_t bb = a; bb < w.size(); ++bb) {
                    double v = w[a].second.cwiseProduct(w[bb].second).sum();
                    h(w[a].first, w[bb].first) += v;
                    if (w[a].first != w[bb].first) h(w[bb].first, w[a].first) += v;
                }
        }
        double ridge = 1e-14 * (h.trace() / std::max(1, m) + 1.0);
        VectorXd d;
        double lambda2 = -1.0;
        for (int attempt = 0; attempt < 6; ++attempt) {
            Eigen::LDLT<MatrixXd> ldlt(h + ridge * MatrixXd::Identity(m, m));
            d = ldlt.solve(-g);
            lambda2 = -g.dot(d);
            if (std::isfinite(lambda2) && lambda2 >= 0.0) break;
            ridge *= 1e3;
        }
        if (!std::isfinite(lambda2)) throw NumericalFailure("solve_sdp: Newton step not finite");
        if (lambda2 / 2.0 <= 1e-9) return theta;

        auto f0 = barrier_value(ws, theta);
        if (!f0) throw NumericalFailure("solve_sdp: lost feasibility");
        double merit0 = mu * c.dot(theta) + *f0;
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = theta + alpha * d;
            auto bv = barrier_value(ws, cand);
            if (bv) {
                double merit = mu * c.dot(cand) + *bv;
                if (merit <= merit0 - 0.25 * alpha * lambda2) {
                    theta = cand;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) return theta;  // stalled near the central point
    }
    return theta;
}

}  // namespace detail

/// Primal log-det barrier solver: phase-I margin maximization from an
/// automatically feasible start, then path-following on the objective.
/// A reported feasible solution always re-verifies through an independent
/// eigenvalue check; Infeasible carries the phase-I max-margin certificate.
inline SdpResult solve_sdp(const LmiProblem& problem, const SdpOptions& opt = {}) {
    problem.validate();
    const int m = problem.n_vars;

    double scale = 1.0;
    for (const auto& b : problem.blocks) scale = std::max(scale, b.F0.cwiseAbs().maxCoeff());

    auto verified_margin = [&](const VectorXd& theta) {
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& b : problem.blocks)
            margin = std::min(margin, min_eigenvalue_sym(b.evaluate(theta)));
        if (problem.blocks.empty()) margin = 0.0;
        return margin;
    };

    if (m == 0) {
        // No decision variables: the verdict is a pure eigenvalue check.
        SdpResult r;
        VectorXd theta(0);
        double margin = verified_margin(theta);
        if (margin >= 0.0) {
            r.feasible = true;
            r.solution = {theta, std::nullopt, margin};
        } else {
            r.infeasibility = "constant block has minimum eigenvalue " + std::to_string(margin);
        }
        return r;
    }

    // Working problem: original blocks + variable box.
    const double box = opt.variable_bound * scale;
    detail::BarrierWorkspace work;
    work.n_vars = m;
    work.blocks = problem.blocks;
    for (int k = 0; k < m; ++k) {
        LmiBlock lo, hi;
        lo.F0 = MatrixXd::Constant(1, 1, box);
        lo.terms = {{k, MatrixXd::Constant(1, 1, -1.0)}};
        hi.F0 = MatrixXd::Constant(1, 1, box);
        hi.terms = {{k, MatrixXd::Constant(1, 1, 1.0)}};
        work.blocks.push_back(std::move(lo));
        work.blocks.push_back(std::move(hi));
    }
    for (const auto& b : work.blocks) work.nu += static_cast<double>(b.dim());

    // Phase I: maximize the uniform margin t over blocks, capped at 10*scale.
    detail::BarrierWorkspace ph1;
    ph1.n_vars = m + 1;
    for (const auto& b : work.blocks) {
        LmiBlock ext = b;
        ext.terms.emplace_back(m, -MatrixXd::Identity(b.dim(), b.dim()));
        ph1.blocks.push_back(std::move(ext));
    }
    {
        LmiBlock cap;
        cap.F0 = MatrixXd::Constant(1, 1, 10.0 * scale);
        cap.terms = {{m, MatrixXd::Constant(1, 1, -1.0)}};
        ph1.blocks.push_back(std::move(cap));
    }
    for (const auto& b : ph1.blocks) ph1.nu += static_cast<double>(b.dim());

    VectorXd th1 = VectorXd::Zero(m + 1);
    {
        double minlam = std::numeric_limits<double>::infinity();
        VectorXd zero = VectorXd::Zero(m);
        for (const auto& b : work.blocks) minlam = std::min(minlam, min_eigenvalue_sym(b.evaluate(zero)));
        th1(m) = minlam - 1.0;  // strictly feasible for the extended problem
    }
    VectorXd c1 = VectorXd::Zero(m + 1);
    c1(m) = -1.0;

    const bool has_objective = problem.objective.has_value() && problem.objective->size() == m &&
                               problem.objective->norm() > 0.0;
    double mu = 1.0;
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        th1 = detail::newton_center(ph1, c1, mu, th1, opt);
        if (has_objective && th1(m) > 0.05 * scale) break;  // interior point is good enough
        if (ph1.nu / mu <= opt.margin_resolution * scale) break;
        mu *= 10.0;
    }
    double tstar = th1(m);
    if (tstar <= 0.0) {
        SdpResult r;
        r.infeasibility = "phase-I max margin " + std::to_string(tstar) + " (resolution " +
                          std::to_string(opt.margin_resolution * scale) + "): no feasible point";
        return r;
    }
    VectorXd theta = th1.head(m);

    std::optional<double> objective_value;
    if (has_objective) {
        const VectorXd c = *problem.objective;
        mu = 1.0;
        for (int outer = 0; outer < opt.max_outer; ++outer) {
            theta = detail::newton_center(work, c, mu, theta, opt);
            if (work.nu / mu <= opt.gap_tol * (1.0 + std::abs(c.dot(theta)))) break;
            mu *= 10.0;
        }
        objective_value = c.dot(theta);
    }

    double margin = verified_margin(theta);
    if (margin < 0.0) {
        // The path-following iterate sits a hair outside; pull it toward the
        // strictly feasible phase-I center until the eigenvalue check passes.
        VectorXd center = th1.head(m);
        double s = 1e-9;
        while (margin < 0.0 && s <= 1e-3) {
            theta = (1.0 - s) * theta + s * center;
            margin = verified_margin(theta);
            s *= 10.0;
        }
        if (margin < 0.0)
            throw NumericalFailure("solve_sdp: converged point failed the eigenvalue check");
        if (has_objective) objective_value = problem.objective->dot(theta);
    }

    SdpResult r;
    r.feasible = true;
    r.solution = {std::move(theta), objective_value, margin};
    return r;
}

// ---------------------------------------------------------------------------
// Variable bookkeeping for matrix-valued decision variables.
// ---------------------------------------------------------------------------

/// Symmetric matrix variable parameterized by its upper triangle.
class SymmetricVariable {
  public:
    SymmetricVariable(int offset, int dim) : offset_(offset), dim_(dim) {}

    int count() const { return dim_ * (dim_ + 1) / 2; }
    int dim() const { return dim_; }
    int offset() const { return offset_; }

    /// Basis matrix of the k-th scalar component (E_ii or E_ij + E_ji).
    MatrixXd basis(int k) const {
        auto [i, j] = entry(k);
        MatrixXd e = MatrixXd::Zero(dim_, dim_);
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        if (i == j) e(i, i) = 1.0;
        return e;
    }

    std::pair<int, int> entry(int k) const {
        int i = 0, left = k;
        while (left >= dim_ - i) {
            left -= dim_ - i;
            ++i;
        }
        return {i, i + left};
    }

    MatrixXd unpack(const VectorXd& theta) const {
        MatrixXd out = MatrixXd::Zero(dim_, dim_);
        for (int k = 0; k < count(); ++k) {
            auto [i, j] = entry(k);
            out(i, j) = out(j, i) = theta(offset_ + k);
        }
        return out;
    }

  private:
    int offset_, dim_;
};

/// Dense rectangular matrix variable (row-major scalar layout).
class MatrixVariable {
  public:
    MatrixVariable(int offset, int rows, int cols) : offset_(offset), rows_(rows), cols_(cols) {}

    int count() const { return rows_ * cols_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int offset() const { return offset_; }

    MatrixXd basis(int k) const {
        MatrixXd e = MatrixXd::Zero(rows_, cols_);
        e(k / cols_, k % cols_) = 1.0;
        return e;
    }

    MatrixXd unpack(const VectorXd& theta) const {
        MatrixXd out(rows_, cols_);
        for (int k = 0; k < count(); ++k) out(k / cols_, k % cols_) = theta(offset_ + k);
        return out;
    }

  private:
    int offset_, rows_, cols_;
};

// ---------------------------------------------------------------------------
// Schur-complement embeddings used by the synthesis theorems.
// ---------------------------------------------------------------------------

/// Gain LMI block: [[-(Pb A^T + A Pb - tau B2 B2^T), Pb C1^T], [C1 Pb, I]]
/// >= shift as an affine constraint in (Pb, tau).
inline LmiBlock schur_embed(const MatrixXd& a, const MatrixXd& b2, const MatrixXd& c1,
                            const SymmetricVariable& pbar, int tau_index) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m2 = c1.rows();
    require(pbar.dim() == n && c1.cols() == n && b2.rows() == n, "schur_embed: dimensions");
    LmiBlock block;
    block.F0 = MatrixXd::Zero(n + m2, n + m2);
    block.F0.bottomRightCorner(m2, m2) = MatrixXd::Identity(m2, m2);
    block.F0 -= strictness_shift(block.F0) * MatrixXd::Identity(n + m2, n + m2);
    for (int k = 0; k < pbar.count(); ++k) {
        MatrixXd e = pbar.basis(k);
        MatrixXd f = MatrixXd::Zero(n + m2, n + m2);
        f.topLeftCorner(n, n) = -(e * a.transpose() + a * e);
        f.topRightCorner(n, m2) = e * c1.transpose();
        f.bottomLeftCorner(m2, n) = c1 * e;
        block.terms.emplace_back(pbar.offset() + k, std::move(f));
    }
    MatrixXd ftau = MatrixXd::Zero(n + m2, n + m2);
    ftau.topLeftCorner(n, n) = b2 * b2.transpose();
    block.terms.emplace_back(tau_index, std::move(ftau));
    return block;
}

/// Observer-trace block [[Pb, Q C2^T], [C2 Q, W]] >= shift, affine in (Pb, W).
inline LmiBlock trace_coupling_embed(const MatrixXd& q, const MatrixXd& c2,
                                     const SymmetricVariable& pbar, const SymmetricVariable& w) {
    const Eigen::Index n = q.rows();
    const Eigen::Index m1 = c2.rows();
    require(pbar.dim() == n && w.dim() == m1 && c2.cols() == n, "trace_coupling_embed: dimensions");
    LmiBlock block;
    block.F0 = MatrixXd::Zero(n + m1, n + m1);
    block.F0.topRightCorner(n, m1) = q * c2.transpose();
    block.F0.bottomLeftCorner(m1, n) = c2 * q;
    block.F0 -= strictness_shift(block.F0) * MatrixXd::Identity(n + m1, n + m1);
    for (int k = 0; k < pbar.count(); ++k) {
        MatrixXd f = MatrixXd::Zero(n + m1, n + m1);
        f.topLeftCorner(n, n) = pbar.basis(k);
        block.terms.emplace_back(pbar.offset() + k, std::move(f));
    }
    for (int k = 0; k < w.count(); ++k) {
        MatrixXd f = MatrixXd::Zero(n + m1, n + m1);
        f.bottomRightCorner(m1, m1) = w.basis(k);
        block.terms.emplace_back(w.offset() + k, std::move(f));
    }
    return block;
}

/// Data of one bounded-real design inequality evaluated at a fixed Laplacian
/// eigenvalue: all matrices are already in the T-transformed coordinates.
struct BoundedRealData {
    MatrixXd a_bar;   // T frakA T^{-1}
    MatrixXd b1_bar;  // T frakB1
    MatrixXd c2_bar;  // frakC2 T^{-1}
    MatrixXd c1_bar;  // frakC1 T^{-1}
    MatrixXd d1;      // frakD1
};

/// Design BRL block for Theorem-style inequalities
///   [[Ups, S B1 + V D1], [(S B1 + V D1)^T, -g I]] <= 0,
/// Ups = Abar^T S + S Abar + C2bar^T V^T + V C2bar + C1bar^T C1bar,
/// with S = diag(S11, S22) and V = [V1; 0], returned as the negated block
/// (>= shift form). gamma2_index < 0 pins g = gamma2_fixed.
inline LmiBlock bounded_real_embed(const BoundedRealData& data, const SymmetricVariable& s11,
                                   const SymmetricVariable& s22, const MatrixVariable& v1,
                                   int gamma2_index, double gamma2_fixed = 0.0) {
    const Eigen::Index d = data.a_bar.rows();
    const Eigen::Index d1 = s11.dim();
    const Eigen::Index q1 = data.b1_bar.cols();
    require(d1 + s22.dim() == d, "bounded_real_embed: S partition");
    require(v1.rows() == d1 && v1.cols() == data.c2_bar.rows(), "bounded_real_embed: V1 shape");
    require(data.d1.rows() == data.c2_bar.rows() && data.d1.cols() == q1,
            "bounded_real_embed: D1 shape");
    const Eigen::Index dim = d + q1;

    auto embed_s = [&](const MatrixXd& e, int which) {
        MatrixXd s = MatrixXd::Zero(d, d);
        if (which == 0)
            s.topLeftCorner(d1, d1) = e;
        else
            s.bottomRightCorner(d - d1, d - d1) = e;
        MatrixXd f = MatrixXd::Zero(dim, dim);
        f.topLeftCorner(d, d) = s * data.a_bar + data.a_bar.transpose() * s;
        f.topRightCorner(d, q1) = s * data.b1_bar;
        f.bottomLeftCorner(q1, d) = (s * data.b1_bar).transpose();
        return MatrixXd(-f);  // negated: constraint is "< 0"
    };

    LmiBlock block;
    block.F0 = MatrixXd::Zero(dim, dim);
    block.F0.topLeftCorner(d, d) = data.c1_bar.transpose() * data.c1_bar;
    if (gamma2_index < 0) block.F0.bottomRightCorner(q1, q1) -= gamma2_fixed * MatrixXd::Identity(q1, q1);
    block.F0 = -block.F0;
    block.F0 -= strictness_shift(block.F0) * MatrixXd::Identity(dim, dim);

    for (int k = 0; k < s11.count(); ++k)
        block.terms.emplace_back(s11.offset() + k, embed_s(s11.basis(k), 0));
    for (int k = 0; k < s22.count(); ++k)
        block.terms.emplace_back(s22.offset() + k, embed_s(s22.basis(k), 1));
    for (int k = 0; k < v1.count(); ++k) {
        MatrixXd e = v1.basis(k);  // d1 x (nc+m1); V = [e; 0]
        MatrixXd v = MatrixXd::Zero(d, e.cols());
        v.topRows(d1) = e;
        MatrixXd f = MatrixXd::Zero(dim, dim);
        f.topLeftCorner(d, d) = v * data.c2_bar + data.c2_bar.transpose() * v.transpose();
        f.topRightCorner(d, q1) = v * data.d1;
        f.bottomLeftCorner(q1, d) = (v * data.d1).transpose();
        block.terms.emplace_back(v1.offset() + k, MatrixXd(-f));
    }
    if (gamma2_index >= 0) {
        MatrixXd f = MatrixXd::Zero(dim, dim);
        f.bottomRightCorner(q1, q1) = MatrixXd::Identity(q1, q1);
        block.terms.emplace_back(gamma2_index, std::move(f));
    }
    return block;
}

/// Positivity block var >= floor * I for a symmetric matrix variable.
inline LmiBlock positivity_block(const SymmetricVariable& var, double floor_value) {
    LmiBlock block;
    block.F0 = -floor_value * MatrixXd::Identity(var.dim(), var.dim());
    for (int k = 0; k < var.count(); ++k) block.terms.emplace_back(var.offset() + k, var.basis(k));
    return block;
}

/// Scalar bound block theta_k >= floor.
inline LmiBlock scalar_lower_bound(int index, double floor_value) {
    LmiBlock block;
    block.F0 = MatrixXd::Constant(1, 1, -floor_value);
    block.terms.emplace_back(index, MatrixXd::Constant(1, 1, 1.0));
    return block;
}

}  // namespace consyn
