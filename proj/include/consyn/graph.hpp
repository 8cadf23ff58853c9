#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "consyn/errors.hpp"
#include "consyn/matrix_utils.hpp"

namespace consyn {

/// Undirected communication graph with 1-based node ids and 0/1 adjacency.
struct Graph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // normalized (i < j), unique

    Graph() = default;
    Graph(int n, std::vector<std::pair<int, int>> edge_list) : n_nodes(n) {
        if (n <= 0) throw IllFormed("Graph: n_nodes must be positive");
        std::set<std::pair<int, int>> uniq;
        for (auto [i, j] : edge_list) {
            if (i == j) throw IllFormed("Graph: self-loop at node " + std::to_string(i));
            if (i < 1 || j < 1 || i > n || j > n)
                throw IllFormed("Graph: edge (" + std::to_string(i) + "," + std::to_string(j) +
                                ") out of range [1," + std::to_string(n) + "]");
            uniq.insert({std::min(i, j), std::max(i, j)});
        }
        edges.assign(uniq.begin(), uniq.end());
    }
};

inline MatrixXd adjacency(const Graph& g) {
    MatrixXd a = MatrixXd::Zero(g.n_nodes, g.n_nodes);
    for (auto [i, j] : g.edges) {
        a(i - 1, j - 1) = 1.0;
        a(j - 1, i - 1) = 1.0;
    }
    return a;
}

/// Laplacian L = D - A: diagonal holds degrees, off-diagonal -a_ij.
inline MatrixXd laplacian(const Graph& g) {
    MatrixXd l = MatrixXd::Zero(g.n_nodes, g.n_nodes);
    for (auto [i, j] : g.edges) {
        l(i - 1, j - 1) -= 1.0;
        l(j - 1, i - 1) -= 1.0;
        l(i - 1, i - 1) += 1.0;
        l(j - 1, j - 1) += 1.0;
    }
    return l;
}

/// True iff a path exists between every pair of nodes (union-find sweep).
inline bool is_connected(const Graph& g) {
    if (g.n_nodes <= 1) return true;
    std::vector<int> parent(g.n_nodes);
    for (int i = 0; i < g.n_nodes; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    int components = g.n_nodes;
    for (auto [i, j] : g.edges) {
        int a = find(i - 1), b = find(j - 1);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

/// Spectral data of the Laplacian: ascending eigenvalues, an orthogonal
/// diagonalizer U with first column 1/sqrt(N), and the extreme nonzero
/// eigenvalues lambda2, lambdaN.
struct GraphSpectrum {
    MatrixXd laplacian;
    VectorXd eigenvalues;  // ascending
    MatrixXd diagonalizer; // orthogonal, U^T L U diagonal
    double lambda2 = 0.0;
    double lambdaN = 0.0;

    int n_nodes() const { return static_cast<int>(eigenvalues.size()); }

    /// Consensus projector M = I - (1/N) 1 1^T.
    MatrixXd consensus_projector() const {
        int n = n_nodes();
        return MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / n);
    }
};

namespace detail {

// Column sign fix: largest-magnitude entry (lowest index on ties) positive.
inline void fix_column_signs(MatrixXd& u) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index imax = 0;
        double best = 0.0;
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            if (std::abs(u(r, c)) > best + 1e-14) {
                best = std::abs(u(r, c));
                imax = r;
            }
        }
        if (u(imax, c) < 0.0) u.col(c) *= -1.0;
    }
}

}  // namespace detail

/// Eigendecomposition of the Laplacian. Throws DisconnectedGraph when
/// lambda2 fails the scale-relative connectivity test.
inline GraphSpectrum spectrum(const Graph& g) {
    GraphSpectrum s;
    s.laplacian = laplacian(g);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.laplacian);
    s.eigenvalues = es.eigenvalues();
    s.diagonalizer = es.eigenvectors();
    detail::fix_column_signs(s.diagonalizer);
    const int n = g.n_nodes;
    s.lambdaN = s.eigenvalues(n - 1);
    if (n == 1) {
        s.lambda2 = 0.0;
        s.diagonalizer(0, 0) = 1.0;
        return s;
    }
    s.lambda2 = s.eigenvalues(1);
    if (s.lambda2 <= 1e-9 * std::max(1.0, s.lambdaN))
        throw DisconnectedGraph("spectrum: lambda2 = " + std::to_string(s.lambda2) +
                                " indicates a disconnected graph");
    return s;
}

}  // namespace consyn
