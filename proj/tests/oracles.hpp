#pragma once

// Independent reference computations used only by the test suites. None of
// these call into the library routines they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(gen);
  return m;
}

/// Lawson-Hanson active-set NNLS: argmin ||A x - b|| subject to x >= 0.
inline Vector nnls(const Matrix& a, const Vector& b, double tol = 1e-12, int max_iter = 500) {
  const Eigen::Index n = a.cols();
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Vector zp = ap.colPivHouseholderQr().solve(b);
    Vector z = Vector::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    return z;
  };
  for (int outer = 0; outer < max_iter; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      const Vector z = solve_passive();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && std::abs(x(j)) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

/// Minimizer of t|v| + 0.5 (v - x)^2 by successively refined grid search.
inline double prox_grid_search(double x, double t) {
  double lo = std::min(x, 0.0) - 1.0, hi = std::max(x, 0.0) + 1.0;
  double best = 0.0;
  const auto f = [&](double v) { return t * std::abs(v) + 0.5 * (v - x) * (v - x); };
  for (int round = 0; round < 8; ++round) {
    constexpr int kPoints = 2001;
    const double step = (hi - lo) / (kPoints - 1);
    double best_f = INFINITY;
    for (int i = 0; i < kPoints; ++i) {
      const double v = lo + step * i;
      if (f(v) < best_f) {
        best_f = f(v);
        best = v;
      }
    }
    if (f(0.0) <= best_f) best = 0.0;
    lo = best - 2 * step;
    hi = best + 2 * step;
  }
  return best;
}

/// Brute-force union-symmetrized KNN over columns: full sort per node.
inline std::set<std::pair<std::size_t, std::size_t>> knn_brute_force(const Matrix& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.cols());
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((x.col(static_cast<Eigen::Index>(i)) - x.col(static_cast<Eigen::Index>(j))).norm(), j);
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t t = 0; t < std::min(k, cand.size()); ++t) {
      edges.emplace(std::min(i, cand[t].second), std::max(i, cand[t].second));
    }
  }
  return edges;
}

/// (1/2) sum over ordered pairs of W_ij ||s_i - s_j||^2.
inline double edge_sum(const Matrix& w, const Matrix& s) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (w(i, j) != 0.0) total += w(i, j) * (s.col(i) - s.col(j)).squaredNorm();
  return 0.5 * total;
}

/// True when every label's pixels form one 4-connected set.
template <typename Label>
bool all_regions_connected(const std::vector<Label>& labels, std::size_t height, std::size_t width) {
  std::vector<bool> seen_label;
  std::vector<bool> visited(labels.size(), false);
  std::vector<std::size_t> count;
  for (const auto l : labels) {
    if (static_cast<std::size_t>(l) >= count.size()) count.resize(static_cast<std::size_t>(l) + 1, 0);
    ++count[static_cast<std::size_t>(l)];
  }
  seen_label.assign(count.size(), false);
  for (std::size_t start = 0; start < labels.size(); ++start) {
    const auto l = static_cast<std::size_t>(labels[start]);
    if (seen_label[l]) continue;
    seen_label[l] = true;
    std::size_t reached = 0;
    std::deque<std::size_t> q{start};
    visited[start] = true;
    while (!q.empty()) {
      const std::size_t p = q.front();
      q.pop_front();
      ++reached;
      const std::size_t r = p / width, c = p % width;
      const std::size_t nbr[4] = {r > 0 ? p - width : p, r + 1 < height ? p + width : p, c > 0 ? p - 1 : p,
                                  c + 1 < width ? p + 1 : p};
      for (const std::size_t nb : nbr) {
        if (!visited[nb] && static_cast<std::size_t>(labels[nb]) == l) {
          visited[nb] = true;
          q.push_back(nb);
        }
      }
    }
    if (reached != count[l]) return false;
  }
  return true;
}

/// Plain reweighted-l1 ADMM with no graph term: identical splitting but the
/// V3 block collapses to S - Lambda3 (so Lambda3 stays zero), and the S system
/// is solved by an LDLT factorization rather than LLT.
inline Matrix graph_free_admm(const Matrix& y, const Matrix& a, double lambda_s, double mu, double epsilon,
                              int outer_iters, int inner_iters) {
  const Eigen::Index m = a.cols(), n = y.cols();
  Matrix s = Matrix::Zero(m, n), v1 = Matrix::Zero(y.rows(), n), l1 = Matrix::Zero(y.rows(), n);
  Matrix v2 = Matrix::Zero(m, n), v3 = Matrix::Zero(m, n), v4 = Matrix::Zero(m, n);
  Matrix l2 = Matrix::Zero(m, n), l3 = Matrix::Zero(m, n), l4 = Matrix::Zero(m, n);
  const Matrix sys = a.transpose() * a + 3.0 * Matrix::Identity(m, m);
  const Eigen::LDLT<Matrix> ldlt(sys);
  for (int outer = 0; outer < outer_iters; ++outer) {
    Vector weights(m);
    for (Eigen::Index k = 0; k < m; ++k) weights(k) = 1.0 / ((s - l2).row(k).norm() + epsilon);
    for (int inner = 0; inner < inner_iters; ++inner) {
      const Matrix rhs = a.transpose() * (v1 + l1) + (v2 + l2) + (v3 + l3) + (v4 + l4);
      s = ldlt.solve(rhs);
      v1 = (y + mu * (a * s - l1)) / (1.0 + mu);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < m; ++k) {
          const double x = s(k, j) - l2(k, j);
          const double t = lambda_s / mu * weights(k);
          v2(k, j) = std::abs(x) <= t ? 0.0 : (x > 0 ? x - t : x + t);
        }
      }
      v3 = s - l3;
      v4 = (s - l4).cwiseMax(0.0);
      l1 = l1 - a * s + v1;
      l2 = l2 - s + v2;
      l3 = l3 - s + v3;
      l4 = l4 - s + v4;
    }
  }
  return s.cwiseMax(0.0);
}

/// Term-by-term objective with explicit loops.
inline double naive_objective(const Matrix& y, const Matrix& a, const Matrix& s, const Matrix& ws,
                              const std::vector<std::vector<std::size_t>>& blocks,
                              const std::vector<Matrix>& adjacency, double lambda_s, double lambda_g) {
  double fit = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      double pred = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) pred += a(i, k) * s(k, j);
      fit += (y(i, j) - pred) * (y(i, j) - pred);
    }
  }
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) l1 += std::abs(ws.data()[i] * s.data()[i]);
  double smooth = 0.0;
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const auto& px = blocks[g];
    for (std::size_t i = 0; i < px.size(); ++i)
      for (std::size_t j = 0; j < px.size(); ++j)
        smooth += 0.5 * adjacency[g](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                  (s.col(static_cast<Eigen::Index>(px[i])) - s.col(static_cast<Eigen::Index>(px[j]))).squaredNorm();
  }
  return 0.5 * fit + lambda_s * l1 + lambda_g * smooth;
}

}  // namespace oracle
