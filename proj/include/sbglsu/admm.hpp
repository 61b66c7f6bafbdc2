#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "sbglsu/graph.hpp"
#include "sbglsu/hsi_core.hpp"
#include "sbglsu/kernels.hpp"

namespace sbglsu {

struct SolverConfig {
  double lambda_s = 0.0;
  double lambda_g = 0.0;
  double mu = 0.1;
  double epsilon = 1e-3;
  std::size_t outer_iters = 60;
  std::size_t inner_iters = 8;
  // Outer loop stops early once ||S(l+1) - S(l)||_F / max(||S(l)||_F, 1e-12) <= tol.
  double tol = 0.0;
  Execution exec = Execution::kParallel;
  // Re-check the two linear-system residuals after every solve (slow).
  bool verify_residuals = false;

  void validate() const;
};

/// Splitting variables and scaled multipliers carried through the iteration.
struct SolverState {
  Matrix s;
  Matrix v1, v2, v3, v4;
  Matrix lambda1, lambda2, lambda3, lambda4;
  Matrix ws;

  static SolverState zeros(std::size_t bands, std::size_t endmembers, std::size_t pixels);
};

/// Factorizations reused by every inner iteration.
struct Precomputed {
  Eigen::LLT<Matrix> sys_factor;                   // A^T A + 3 I
  std::vector<kernels::GraphBlockFactor> graph_factors;  // 2 lambda_g L_g + mu I per superpixel

  static Precomputed build(const Matrix& a, const SuperpixelGraph& graph, double lambda_g, double mu);
};

inline constexpr double kLinearResidualTolerance = 1e-8;
inline constexpr std::size_t kConvergenceWindow = 5;

/// Per-outer-iteration history of a solve.
struct ConvergenceRecord {
  std::vector<double> objective;              // evaluated at max(S, 0) with that iteration's Ws
  std::vector<std::optional<double>> rmse;    // against the supplied ground truth
  std::vector<double> relative_change;        // ||S(l+1) - S(l)|| / max(||S(l)||, 1e-12)
  // ||S(last) - S(last - 5)|| / max(||S(last - 5)||, 1e-12); nullopt when
  // the run has at most five outer iterations.
  std::optional<double> tail_change;

  std::size_t iterations() const noexcept { return objective.size(); }
};

struct SolveResult {
  AbundanceMatrix abundances;
  ConvergenceRecord record;
};

// Ws(k, :) = 1 / (||row k of (S - Lambda2)||_2 + eps), identical for every column.
Matrix update_weights(const Matrix& s, const Matrix& lambda2, double epsilon);

// Solves (A^T A + 3I) S = A^T (V1 + Lambda1) + sum_k (Vk + Lambda_k).
Matrix update_s(const SolverState& state, const Matrix& a, const Eigen::LLT<Matrix>& sys_factor);

// (Y + mu (A S - Lambda1)) / (1 + mu)
Matrix update_v1(const Matrix& y, const Matrix& a, const Matrix& s, const Matrix& lambda1, double mu);

Matrix soft_threshold(const Matrix& x, const Matrix& threshold,
                      Execution exec = Execution::kParallel);

// Per superpixel: V3_g (2 lambda_g L_g + mu I) = mu (S_g - Lambda3_g).
Matrix update_v3(const Matrix& s, const Matrix& lambda3, const SuperpixelGraph& graph,
                 const std::vector<kernels::GraphBlockFactor>& graph_factors, double mu,
                 Execution exec = Execution::kParallel);

// max(S - Lambda4, 0)
Matrix project_nonneg(const Matrix& s, const Matrix& lambda4);

void update_duals(SolverState& state, const Matrix& a);

/// 0.5||Y - AS||_F^2 + lambda_s ||Ws .* S||_1 + lambda_g sum_g Tr(S_g L_g S_g^T),
/// or +infinity when any entry of S is below -1e-12.
double objective(const Matrix& y, const Matrix& a, const Matrix& s, const Matrix& ws,
                 const SuperpixelGraph& graph, double lambda_s, double lambda_g);

/// Reweighted inner/outer ADMM for nonnegative sparse unmixing with a
/// per-superpixel graph Laplacian penalty. When `truth` is given its RMSE is
/// recorded after every outer iteration.
SolveResult solve(const Matrix& y, const Matrix& a, const SuperpixelGraph& graph,
                  const SolverConfig& config, const Matrix* truth = nullptr);

}  // namespace sbglsu
