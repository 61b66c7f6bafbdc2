#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "sbglsu/graph.hpp"
#include "sbglsu/kernels.hpp"
#include "sbglsu/slic.hpp"

using namespace sbglsu;

namespace {

Matrix random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  return m;
}

HsiCube random_cube(std::size_t side, std::size_t bands) {
  const Matrix y = random_matrix(1, static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(side * side), 0, 1);
  return HsiCube(side, side, bands, std::vector<double>(y.data(), y.data() + y.size()));
}

kernels::SlicCenters grid_centers(const HsiCube& cube, std::size_t step) {
  kernels::SlicCenters c;
  const Matrix y = cube_to_matrix(cube);
  std::vector<Eigen::Index> cols;
  for (std::size_t r = step / 2; r < cube.height(); r += step) {
    for (std::size_t q = step / 2; q < cube.width(); q += step) {
      c.row.push_back(static_cast<double>(r));
      c.col.push_back(static_cast<double>(q));
      cols.push_back(static_cast<Eigen::Index>(pixel_index(r, q, cube.width())));
    }
  }
  c.spectra.resize(y.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) c.spectra.col(static_cast<Eigen::Index>(k)) = y.col(cols[k]);
  return c;
}

template <Execution E>
void BM_SlicAssign(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto cube = random_cube(side, 50);
  const auto centers = grid_centers(cube, 8);
  const auto buckets = kernels::CenterBuckets::build(centers, side, side, 8);
  const kernels::SlicWindow window{8, 2e-3 / 8};
  std::vector<std::int32_t> labels(side * side);
  for (auto _ : state) {
    std::fill(labels.begin(), labels.end(), -1);
    benchmark::DoNotOptimize(kernels::slic_assign(E, cube, centers, buckets, window, labels));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}

template <Execution E>
void BM_SoftThreshold(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix x = random_matrix(2, 240, n, -1, 1);
  const Matrix t = random_matrix(3, 240, n, 0, 0.5);
  Matrix out(240, n);
  for (auto _ : state) {
    kernels::soft_threshold(E, x, t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 240 * n);
}

struct GraphFixture {
  Matrix rhs;
  std::vector<kernels::GraphBlockFactor> factors;
};

GraphFixture make_graph_fixture(std::size_t side) {
  const auto cube = random_cube(side, 50);
  const auto map = segment(cube, SlicParams{});
  const Matrix y = cube_to_matrix(cube);
  const auto graph = build_graph(y, map, GraphParams{});
  GraphFixture f;
  f.rhs = random_matrix(4, 240, static_cast<Eigen::Index>(side * side), -1, 1);
  for (const auto& b : graph.blocks) {
    const auto n = static_cast<Eigen::Index>(b.pixels.size());
    f.factors.push_back({b.pixels, Eigen::LLT<Matrix>(2e3 * b.laplacian + 0.1 * Matrix::Identity(n, n))});
  }
  return f;
}

template <Execution E>
void BM_GraphBlockSolve(benchmark::State& state) {
  const auto f = make_graph_fixture(static_cast<std::size_t>(state.range(0)));
  Matrix out(f.rhs.rows(), f.rhs.cols());
  for (auto _ : state) {
    kernels::graph_block_solve(E, f.rhs, 0.1, f.factors, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <Execution E>
void BM_PairwiseDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix y = random_matrix(5, 224, static_cast<Eigen::Index>(n), 0, 1);
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_distances(E, y, cols));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_SlicAssign, Execution::kSerial)->Arg(75)->Arg(200);
BENCHMARK_TEMPLATE(BM_SlicAssign, Execution::kParallel)->Arg(75)->Arg(200);
BENCHMARK_TEMPLATE(BM_SoftThreshold, Execution::kSerial)->Arg(5625)->Arg(10000);
BENCHMARK_TEMPLATE(BM_SoftThreshold, Execution::kParallel)->Arg(5625)->Arg(10000);
BENCHMARK_TEMPLATE(BM_GraphBlockSolve, Execution::kSerial)->Arg(75);
BENCHMARK_TEMPLATE(BM_GraphBlockSolve, Execution::kParallel)->Arg(75);
BENCHMARK_TEMPLATE(BM_PairwiseDistances, Execution::kSerial)->Arg(64)->Arg(400);
BENCHMARK_TEMPLATE(BM_PairwiseDistances, Execution::kParallel)->Arg(64)->Arg(400);

BENCHMARK_MAIN();
