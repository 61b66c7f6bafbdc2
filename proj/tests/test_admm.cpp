#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sbglsu/admm.hpp"
#include "sbglsu/errors.hpp"

using namespace sbglsu;
using Index = Eigen::Index;

namespace {

SuperpixelGraph single_block_graph(const Matrix& y) {
  std::vector<std::size_t> all(static_cast<std::size_t>(y.cols()));
  std::iota(all.begin(), all.end(), 0);
  return build_graph(y, {all}, GraphParams{});
}

SuperpixelGraph split_graph(const Matrix& y, std::size_t groups) {
  std::vector<std::vector<std::size_t>> regions(groups);
  for (std::size_t p = 0; p < static_cast<std::size_t>(y.cols()); ++p) regions[p % groups].push_back(p);
  return build_graph(y, regions, GraphParams{});
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("update_weights") {
  const Matrix zero = Matrix::Zero(3, 4);
  CHECK((update_weights(zero, zero, 1e-3).array() == 1e3).all());

  Matrix s(2, 2);
  s << 3.0, 0.0, 0.0, 0.0;
  const Matrix w = update_weights(s, Matrix::Zero(2, 2), 1.0);
  CHECK(w(0, 0) == 0.25);
  CHECK(w(0, 1) == 0.25);
  CHECK(w(1, 0) == 1.0);
  CHECK(w(1, 1) == 1.0);

  std::mt19937_64 gen(1);
  const Matrix x = oracle::random_matrix(gen, 5, 7);
  const Matrix l2 = oracle::random_matrix(gen, 5, 7);
  const double c = 2.5, eps = 0.1;
  const Matrix ws = update_weights(c * x, c * l2, eps);
  for (Eigen::Index k = 0; k < 5; ++k) {
    const double r = (x - l2).row(k).norm();
    for (Eigen::Index j = 0; j < 7; ++j) CHECK(ws(k, j) == doctest::Approx(1.0 / (c * r + eps)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(update_weights(x, Matrix::Zero(5, 6), eps), ShapeError);
}

TEST_CASE("update_s") {
  const Index m = 4, n = 3;
  std::mt19937_64 gen(2);
  {
    const Matrix a = Matrix::Identity(m, m);
    auto st = SolverState::zeros(m, m, n);
    const Matrix x = oracle::random_matrix(gen, m, n);
    st.v1 = x;  // V + Lambda = X for every block
    st.lambda2 = x;
    st.v3 = 0.5 * x;
    st.lambda3 = 0.5 * x;
    st.v4 = -x;
    st.lambda4 = 2.0 * x;
    const auto pre = Precomputed::build(a, single_block_graph(Matrix::Zero(m, n)), 0.0, 0.1);
    CHECK(rel(update_s(st, a, pre.sys_factor), x) <= 1e-14);
  }
  {
    const Matrix a = oracle::random_matrix(gen, 6, m);
    const auto st = SolverState::zeros(6, m, n);
    const auto pre = Precomputed::build(a, single_block_graph(Matrix::Zero(6, n)), 0.0, 0.1);
    CHECK(update_s(st, a, pre.sys_factor).norm() == 0.0);
  }
  {
    const Matrix a = oracle::random_matrix(gen, 6, 10);
    auto st = SolverState::zeros(6, 10, 5);
    for (Matrix* blk : {&st.v1, &st.lambda1}) *blk = oracle::random_matrix(gen, 6, 5);
    for (Matrix* blk : {&st.v2, &st.v3, &st.v4, &st.lambda2, &st.lambda3, &st.lambda4})
      *blk = oracle::random_matrix(gen, 10, 5);
    const auto pre = Precomputed::build(a, single_block_graph(Matrix::Zero(6, 5)), 0.0, 0.1);
    const Matrix s = update_s(st, a, pre.sys_factor);
    const Matrix rhs = a.transpose() * (st.v1 + st.lambda1) + st.v2 + st.lambda2 + st.v3 + st.lambda3 + st.v4 +
                       st.lambda4;
    const Matrix sys = a.transpose() * a + 3.0 * Matrix::Identity(10, 10);
    CHECK((sys * s - rhs).norm() / rhs.norm() <= 1e-10);
  }
}

TEST_CASE("update_v1") {
  Matrix y(1, 1), a(1, 1), s(1, 1), l1(1, 1);
  y << 2.0;
  a << 1.0;
  s << 4.0;
  l1 << 0.0;
  CHECK(update_v1(y, a, s, l1, 1.0)(0, 0) == 3.0);

  std::mt19937_64 gen(3);
  const Matrix am = oracle::random_matrix(gen, 5, 3);
  const Matrix sm = oracle::random_matrix(gen, 3, 4);
  const Matrix lm = oracle::random_matrix(gen, 5, 4);
  const Matrix x = am * sm - lm;
  CHECK(rel(update_v1(x, am, sm, lm, 0.37), x) <= 1e-14);
  CHECK(update_v1(Matrix::Zero(5, 4), am, sm, am * sm, 0.37).norm() <= 1e-14);
}

TEST_CASE("soft_threshold") {
  Matrix x(1, 3), t(1, 3);
  x << 3.0, -3.0, 0.5;
  t << 1.0, 1.0, 1.0;
  for (const auto exec : {Execution::kSerial, Execution::kParallel}) {
    const Matrix r = soft_threshold(x, t, exec);
    CHECK(r(0, 0) == 2.0);
    CHECK(r(0, 1) == -2.0);
    CHECK(r(0, 2) == 0.0);
  }

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), ut(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Matrix xi(1, 1), ti(1, 1);
    xi << ux(gen);
    ti << ut(gen);
    CHECK(std::abs(soft_threshold(xi, ti)(0, 0) - oracle::prox_grid_search(xi(0, 0), ti(0, 0))) <= 1e-6);
  }

  const Matrix a = oracle::random_matrix(gen, 6, 9, -3, 3);
  const Matrix b = oracle::random_matrix(gen, 6, 9, -3, 3);
  const Matrix th = oracle::random_matrix(gen, 6, 9, 0, 2);
  const Matrix da = soft_threshold(a, th), db = soft_threshold(b, th);
  CHECK(((da - db).array().abs() <= (a - b).array().abs() + 1e-15).all());
}

TEST_CASE("update_v3") {
  std::mt19937_64 gen(5);
  const Index m = 3, n = 12;
  const Matrix y = oracle::random_matrix(gen, 4, n, 0, 1);
  const auto graph = split_graph(y, 3);
  const Matrix s = oracle::random_matrix(gen, m, n);
  const Matrix l3 = oracle::random_matrix(gen, m, n);
  const double mu = 0.3;

  for (const auto exec : {Execution::kSerial, Execution::kParallel}) {
    const auto idle = Precomputed::build(Matrix::Identity(4, m), graph, 0.0, mu);
    CHECK(rel(update_v3(s, l3, graph, idle.graph_factors, mu, exec), s - l3) <= 1e-14);
  }

  // Constant columns inside every block are fixed points.
  Matrix c(m, n);
  for (const auto& blk : graph.blocks) {
    const Vector col = oracle::random_matrix(gen, m, 1);
    for (const auto p : blk.pixels) c.col(static_cast<Index>(p)) = col;
  }
  const double lg = 2.0;
  const auto pre = Precomputed::build(Matrix::Identity(4, m), graph, lg, mu);
  CHECK(rel(update_v3(c, Matrix::Zero(m, n), graph, pre.graph_factors, mu), c) <= 1e-12);

  const Matrix v3 = update_v3(s, l3, graph, pre.graph_factors, mu);
  for (const auto& blk : graph.blocks) {
    const auto ng = static_cast<Index>(blk.pixels.size());
    Matrix vg(m, ng), rg(m, ng);
    for (Index i = 0; i < ng; ++i) {
      vg.col(i) = v3.col(static_cast<Index>(blk.pixels[i]));
      rg.col(i) = (s - l3).col(static_cast<Index>(blk.pixels[i]));
    }
    CHECK((2 * lg * vg * blk.laplacian + mu * (vg - rg)).norm() <= 1e-9);
  }

  CHECK_THROWS_AS(update_v3(s, Matrix::Zero(m, n - 1), graph, pre.graph_factors, mu), ShapeError);
  CHECK_THROWS_AS(update_v3(s.leftCols(n - 1), l3.leftCols(n - 1), graph, pre.graph_factors, mu), ShapeError);
}

TEST_CASE("project_nonneg") {
  const Matrix z = Matrix::Zero(2, 2);
  CHECK(project_nonneg(-Matrix::Ones(2, 2), z).norm() == 0.0);
  const Matrix p = Matrix::Constant(2, 2, 0.5);
  CHECK(project_nonneg(p, z) == p);
  Matrix x(1, 2);
  x << -1.0, 2.0;
  Matrix expected(1, 2);
  expected << 0.0, 2.0;
  CHECK(project_nonneg(x, Matrix::Zero(1, 2)) == expected);
}

TEST_CASE("update_duals") {
  std::mt19937_64 gen(6);
  const Matrix a = oracle::random_matrix(gen, 4, 3);
  auto st = SolverState::zeros(4, 3, 5);
  st.s = oracle::random_matrix(gen, 3, 5);
  st.v1 = a * st.s;
  st.v2 = st.v3 = st.v4 = st.s;
  st.lambda2 = oracle::random_matrix(gen, 3, 5);
  const Matrix before = st.lambda2;
  update_duals(st, a);
  CHECK(st.lambda1.norm() == 0.0);
  CHECK(st.lambda2 == before);

  const Matrix r = oracle::random_matrix(gen, 4, 5);
  st.v1 = a * st.s + r;
  update_duals(st, a);
  CHECK(rel(st.lambda1, r) <= 1e-14);
  update_duals(st, a);
  CHECK(rel(st.lambda1, 2 * r) <= 1e-14);
}

TEST_CASE("objective") {
  const Matrix a = Matrix::Identity(3, 3);
  const Matrix y0 = Matrix::Zero(3, 4);
  const auto graph = single_block_graph(y0);
  const Matrix ws = Matrix::Ones(3, 4);
  CHECK(objective(y0, a, Matrix::Zero(3, 4), ws, graph, 1.0, 1.0) == 0.0);
  Matrix neg = Matrix::Zero(3, 4);
  neg(1, 2) = -1.0;
  CHECK(objective(y0, a, neg, ws, graph, 1.0, 1.0) == std::numeric_limits<double>::infinity());

  std::mt19937_64 gen(7);
  const Matrix y = oracle::random_matrix(gen, 5, 20, 0, 1);
  const Matrix am = oracle::random_matrix(gen, 5, 4, 0, 1);
  const Matrix s = oracle::random_matrix(gen, 4, 20, 0, 1);
  const Matrix wr = oracle::random_matrix(gen, 4, 20, 0.1, 2);
  const auto g = split_graph(y, 3);
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<Matrix> adj;
  for (const auto& b : g.blocks) {
    blocks.push_back(b.pixels);
    adj.push_back(b.adjacency);
  }
  const double got = objective(y, am, s, wr, g, 0.3, 0.7);
  const double want = oracle::naive_objective(y, am, s, wr, blocks, adj, 0.3, 0.7);
  CHECK(std::abs(got - want) <= 1e-12 * want);
  CHECK_THROWS_AS(objective(y, am, s.leftCols(19), wr, g, 0.3, 0.7), ShapeError);
}

TEST_CASE("solve recovers a noiseless pure pixel") {
  std::mt19937_64 gen(8);
  const Matrix a = oracle::random_matrix(gen, 10, 4, 0.1, 1.0);
  const Matrix y = a.col(0);
  const auto graph = single_block_graph(y);
  SolverConfig cfg;
  cfg.outer_iters = 200;
  const auto result = solve(y, a, graph, cfg);
  const Vector ref = oracle::nnls(a, y.col(0));
  CHECK((result.abundances.values.col(0) - ref).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(std::abs(ref(0) - 1.0) <= 1e-9);
}

TEST_CASE("solve on zero data stays at zero") {
  std::mt19937_64 gen(9);
  const Matrix a = oracle::random_matrix(gen, 6, 3, 0, 1);
  const Matrix y = Matrix::Zero(6, 5);
  SolverConfig cfg;
  cfg.lambda_s = 0.01;
  cfg.lambda_g = 0.1;
  const auto result = solve(y, a, single_block_graph(y), cfg);
  CHECK(result.abundances.values.norm() == 0.0);
}

TEST_CASE("strong graph term ties identical pixels") {
  std::mt19937_64 gen(10);
  const Matrix a = oracle::random_matrix(gen, 8, 3, 0.1, 1.0);
  Matrix y(8, 2);
  y.col(0) = a.col(0);
  y.col(1) = a.col(0);
  const auto graph = single_block_graph(y);
  REQUIRE(graph.blocks[0].adjacency(0, 1) == 1.0);
  SolverConfig cfg;
  cfg.lambda_g = 1e6;
  const auto result = solve(y, a, graph, cfg);
  const Matrix& s = result.abundances.values;
  CHECK((s.col(0) - s.col(1)).norm() <= 1e-6 * s.col(0).norm());
  // Tied columns reduce to one NNLS problem with doubled data.
  Matrix a2(16, 3);
  a2 << a, a;
  Vector y2(16);
  y2 << y.col(0), y.col(1);
  const Vector ref = oracle::nnls(a2, y2);
  CHECK((s.col(0) - ref).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("without the graph term solve matches a plain reweighted l1 ADMM") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = oracle::random_matrix(gen, 4, 6, 0, 1);
    const Matrix y = a * oracle::random_matrix(gen, 6, 8, 0, 0.5);
    SolverConfig cfg;
    cfg.lambda_s = 0.01;
    cfg.outer_iters = 10;
    cfg.inner_iters = 5;
    const auto result = solve(y, a, split_graph(y, 2), cfg);
    const Matrix ref = oracle::graph_free_admm(y, a, 0.01, cfg.mu, cfg.epsilon, 10, 5);
    CHECK((result.abundances.values - ref).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("solve bookkeeping and errors") {
  std::mt19937_64 gen(12);
  const Matrix a = oracle::random_matrix(gen, 5, 3, 0, 1);
  const Matrix truth = oracle::random_matrix(gen, 3, 6, 0, 1);
  const Matrix y = a * truth;
  const auto graph = split_graph(y, 2);
  SolverConfig cfg;
  cfg.lambda_s = 1e-3;
  cfg.lambda_g = 1e-2;
  cfg.outer_iters = 7;
  cfg.inner_iters = 3;
  cfg.verify_residuals = true;
  const auto result = solve(y, a, graph, cfg, &truth);
  const auto& rec = result.record;
  CHECK(rec.iterations() == 7);
  CHECK(rec.rmse.size() == 7);
  CHECK(rec.relative_change.size() == 7);
  for (const auto& r : rec.rmse) CHECK(r.has_value());
  REQUIRE(rec.tail_change.has_value());
  CHECK(result.abundances.values.minCoeff() >= 0.0);

  cfg.outer_iters = 5;
  const auto short_run = solve(y, a, graph, cfg);
  CHECK_FALSE(short_run.record.tail_change.has_value());
  CHECK_FALSE(short_run.record.rmse.front().has_value());

  cfg.outer_iters = 50;
  cfg.tol = 1e-2;
  CHECK(solve(y, a, graph, cfg).record.iterations() < 50);

  cfg = SolverConfig{};
  CHECK_THROWS_AS(solve(y.topRows(4), a, graph, cfg), ShapeError);
  CHECK_THROWS_AS(solve(y.leftCols(5), a, graph, cfg), ShapeError);
  const Matrix bad_truth = Matrix::Zero(2, 6);
  CHECK_THROWS_AS(solve(y, a, graph, cfg, &bad_truth), ShapeError);
  cfg.mu = 0.0;
  CHECK_THROWS_AS(solve(y, a, graph, cfg), ParameterError);
}
