#include "sbglsu/admm.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "sbglsu/errors.hpp"

namespace sbglsu {

void SolverConfig::validate() const {
  if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s)) throw ParameterError("lambda_s must be finite and >= 0");
  if (!(lambda_g >= 0.0) || !std::isfinite(lambda_g)) throw ParameterError("lambda_g must be finite and >= 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("mu must be finite and > 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be finite and > 0");
  if (outer_iters < 1) throw ParameterError("outer_iters must be >= 1");
  if (inner_iters < 1) throw ParameterError("inner_iters must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError("tol must be >= 0");
}

SolverState SolverState::zeros(std::size_t bands, std::size_t endmembers, std::size_t pixels) {
  const auto l = static_cast<Eigen::Index>(bands);
  const auto m = static_cast<Eigen::Index>(endmembers);
  const auto n = static_cast<Eigen::Index>(pixels);
  SolverState st;
  st.s = Matrix::Zero(m, n);
  st.v1 = Matrix::Zero(l, n);
  st.lambda1 = Matrix::Zero(l, n);
  st.v2 = st.v3 = st.v4 = Matrix::Zero(m, n);
  st.lambda2 = st.lambda3 = st.lambda4 = Matrix::Zero(m, n);
  st.ws = Matrix::Zero(m, n);
  return st;
}

Precomputed Precomputed::build(const Matrix& a, const SuperpixelGraph& graph, double lambda_g,
                               double mu) {
  Precomputed pre;
  Matrix sys = a.transpose() * a;
  sys.diagonal().array() += 3.0;
  pre.sys_factor.compute(sys);
  if (pre.sys_factor.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of A^T A + 3I failed");
  }
  pre.graph_factors.resize(graph.blocks.size());
  for (std::size_t g = 0; g < graph.blocks.size(); ++g) {
    const auto& block = graph.blocks[g];
    Matrix m = 2.0 * lambda_g * block.laplacian;
    m.diagonal().array() += mu;
    auto& f = pre.graph_factors[g];
    f.pixels = block.pixels;
    f.factor.compute(m);
    if (f.factor.info() != Eigen::Success) {
      throw NumericalError("Cholesky factorization of superpixel " + std::to_string(g) + " system failed");
    }
  }
  return pre;
}

Matrix update_weights(const Matrix& s, const Matrix& lambda2, double epsilon) {
  if (s.rows() != lambda2.rows() || s.cols() != lambda2.cols()) {
    throw ShapeError("update_weights: S and Lambda2 shapes differ");
  }
  const Vector row_weight = ((s - lambda2).rowwise().norm().array() + epsilon).inverse();
  return row_weight.replicate(1, s.cols());
}

Matrix update_s(const SolverState& st, const Matrix& a, const Eigen::LLT<Matrix>& sys_factor) {
  Matrix rhs(a.cols(), st.v1.cols());
  rhs.noalias() = a.transpose() * (st.v1 + st.lambda1);
  rhs += st.v2 + st.lambda2;
  rhs += st.v3 + st.lambda3;
  rhs += st.v4 + st.lambda4;
  return sys_factor.solve(rhs);
}

Matrix update_v1(const Matrix& y, const Matrix& a, const Matrix& s, const Matrix& lambda1, double mu) {
  return (y + mu * (a * s - lambda1)) / (1.0 + mu);
}

Matrix soft_threshold(const Matrix& x, const Matrix& threshold, Execution exec) {
  Matrix out;
  kernels::soft_threshold(exec, x, threshold, out);
  return out;
}

Matrix update_v3(const Matrix& s, const Matrix& lambda3, const SuperpixelGraph& graph,
                 const std::vector<kernels::GraphBlockFactor>& graph_factors, double mu,
                 Execution exec) {
  if (s.rows() != lambda3.rows() || s.cols() != lambda3.cols()) {
    throw ShapeError("update_v3: S and Lambda3 shapes differ");
  }
  if (static_cast<std::size_t>(s.cols()) != graph.pixel_count) {
    throw ShapeError("update_v3: graph covers " + std::to_string(graph.pixel_count) +
                     " pixels but S has " + std::to_string(s.cols()) + " columns");
  }
  if (graph_factors.size() != graph.blocks.size()) {
    throw ShapeError("update_v3: factor count does not match superpixel count");
  }
  Matrix out;
  kernels::graph_block_solve(exec, s - lambda3, mu, graph_factors, out);
  return out;
}

Matrix project_nonneg(const Matrix& s, const Matrix& lambda4) { return (s - lambda4).cwiseMax(0.0); }

void update_duals(SolverState& st, const Matrix& a) {
  st.lambda1 += st.v1 - a * st.s;
  st.lambda2 += st.v2 - st.s;
  st.lambda3 += st.v3 - st.s;
  st.lambda4 += st.v4 - st.s;
}

double objective(const Matrix& y, const Matrix& a, const Matrix& s, const Matrix& ws,
                 const SuperpixelGraph& graph, double lambda_s, double lambda_g) {
  if (y.cols() != s.cols() || a.cols() != s.rows() || a.rows() != y.rows() ||
      ws.rows() != s.rows() || ws.cols() != s.cols()) {
    throw ShapeError("objective: inconsistent operand shapes");
  }
  if (s.size() > 0 && s.minCoeff() < -1e-12) return std::numeric_limits<double>::infinity();
  double value = 0.5 * (y - a * s).squaredNorm();
  value += lambda_s * ws.cwiseProduct(s).cwiseAbs().sum();
  if (lambda_g != 0.0) {
    double smooth = 0.0;
    for (const auto& block : graph.blocks) {
      const auto ns = static_cast<Eigen::Index>(block.pixels.size());
      Matrix sg(s.rows(), ns);
      for (Eigen::Index j = 0; j < ns; ++j) sg.col(j) = s.col(static_cast<Eigen::Index>(block.pixels[j]));
      smooth += (sg * block.laplacian).cwiseProduct(sg).sum();
    }
    value += lambda_g * smooth;
  }
  return value;
}

namespace {

double relative_difference(const Matrix& next, const Matrix& prev) {
  return (next - prev).norm() / std::max(prev.norm(), 1e-12);
}

void require_finite(const SolverState& st, std::size_t outer, std::size_t inner) {
  const bool ok = st.s.allFinite() && st.v1.allFinite() && st.v2.allFinite() && st.v3.allFinite() &&
                  st.v4.allFinite() && st.lambda1.allFinite() && st.lambda2.allFinite() &&
                  st.lambda3.allFinite() && st.lambda4.allFinite();
  if (!ok) {
    throw NumericalError("ADMM diverged: non-finite iterate at outer iteration " + std::to_string(outer) +
                         ", inner iteration " + std::to_string(inner));
  }
}

void check_s_residual(const SolverState& st, const Matrix& a) {
  Matrix rhs = a.transpose() * (st.v1 + st.lambda1) + st.v2 + st.lambda2 + st.v3 + st.lambda3 +
               st.v4 + st.lambda4;
  Matrix lhs = a.transpose() * (a * st.s) + 3.0 * st.s;
  const double scale = std::max(rhs.norm(), 1e-300);
  if ((lhs - rhs).norm() / scale > kLinearResidualTolerance && rhs.norm() > 0.0) {
    throw NumericalError("S-update residual exceeds tolerance");
  }
}

void check_v3_residual(const SolverState& st, const Matrix& s_minus_l3, const SuperpixelGraph& graph,
                       double lambda_g, double mu) {
  for (const auto& block : graph.blocks) {
    const auto ns = static_cast<Eigen::Index>(block.pixels.size());
    Matrix v(st.v3.rows(), ns), x(st.v3.rows(), ns);
    for (Eigen::Index j = 0; j < ns; ++j) {
      v.col(j) = st.v3.col(static_cast<Eigen::Index>(block.pixels[j]));
      x.col(j) = s_minus_l3.col(static_cast<Eigen::Index>(block.pixels[j]));
    }
    const Matrix rhs = mu * x;
    const Matrix lhs = 2.0 * lambda_g * v * block.laplacian + mu * v;
    if (rhs.norm() > 0.0 && (lhs - rhs).norm() / rhs.norm() > kLinearResidualTolerance) {
      throw NumericalError("V3-update residual exceeds tolerance");
    }
  }
}

}  // namespace

SolveResult solve(const Matrix& y, const Matrix& a, const SuperpixelGraph& graph,
                  const SolverConfig& config, const Matrix* truth) {
  config.validate();
  if (y.rows() != a.rows()) {
    throw ShapeError("Y has " + std::to_string(y.rows()) + " bands but A has " + std::to_string(a.rows()));
  }
  if (static_cast<std::size_t>(y.cols()) != graph.pixel_count) {
    throw ShapeError("Y has " + std::to_string(y.cols()) + " pixels but the graph covers " +
                     std::to_string(graph.pixel_count));
  }
  if (truth && (truth->rows() != a.cols() || truth->cols() != y.cols())) {
    throw ShapeError("ground truth must be " + std::to_string(a.cols()) + "x" + std::to_string(y.cols()));
  }

  const auto bands = static_cast<std::size_t>(y.rows());
  const auto m = static_cast<std::size_t>(a.cols());
  const auto n = static_cast<std::size_t>(y.cols());
  const Precomputed pre = Precomputed::build(a, graph, config.lambda_g, config.mu);
  SolverState st = SolverState::zeros(bands, m, n);

  SolveResult result;
  auto& record = result.record;
  std::deque<Matrix> history;  // last kConvergenceWindow + 1 outer iterates
  history.push_back(st.s);
  const double shrink = config.lambda_s / config.mu;
  Matrix as(y.rows(), y.cols());
  Matrix s_minus_l3(a.cols(), y.cols());

  for (std::size_t outer = 0; outer < config.outer_iters; ++outer) {
    st.ws = update_weights(st.s, st.lambda2, config.epsilon);
    const Matrix threshold = shrink * st.ws;
    const Matrix s_prev = st.s;

    for (std::size_t inner = 0; inner < config.inner_iters; ++inner) {
      st.s = update_s(st, a, pre.sys_factor);
      if (config.verify_residuals) check_s_residual(st, a);
      // A S is shared by the V1 step and the Lambda1 step.
      as.noalias() = a * st.s;
      st.v1 = (y + config.mu * (as - st.lambda1)) / (1.0 + config.mu);
      st.v2 = soft_threshold(st.s - st.lambda2, threshold, config.exec);
      s_minus_l3 = st.s - st.lambda3;
      kernels::graph_block_solve(config.exec, s_minus_l3, config.mu, pre.graph_factors, st.v3);
      if (config.verify_residuals) check_v3_residual(st, s_minus_l3, graph, config.lambda_g, config.mu);
      st.v4 = project_nonneg(st.s, st.lambda4);
      st.lambda1 += st.v1 - as;
      st.lambda2 += st.v2 - st.s;
      st.lambda3 += st.v3 - st.s;
      st.lambda4 += st.v4 - st.s;
      require_finite(st, outer, inner);
    }

    const Matrix feasible = st.s.cwiseMax(0.0);
    record.objective.push_back(objective(y, a, feasible, st.ws, graph, config.lambda_s, config.lambda_g));
    if (truth) {
      record.rmse.emplace_back(std::sqrt((*truth - feasible).squaredNorm() / static_cast<double>(m * n)));
    } else {
      record.rmse.emplace_back(std::nullopt);
    }
    const double change = relative_difference(st.s, s_prev);
    record.relative_change.push_back(change);
    history.push_back(st.s);
    if (history.size() > kConvergenceWindow + 1) history.pop_front();
    if (config.tol > 0.0 && change <= config.tol) break;
  }

  if (history.size() == kConvergenceWindow + 1 && record.iterations() > kConvergenceWindow) {
    record.tail_change = relative_difference(history.back(), history.front());
  }
  result.abundances.values = st.s.cwiseMax(0.0);
  return result;
}

}  // namespace sbglsu
