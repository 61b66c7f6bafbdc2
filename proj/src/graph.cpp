#include "sbglsu/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sbglsu/errors.hpp"

namespace sbglsu {

void GraphParams::validate() const {
  if (k_neighbors < 1) throw ParameterError("k_neighbors must be >= 1");
  if (sigma && !(*sigma > 0.0)) throw ParameterError("fixed sigma must be > 0");
}

double heat_kernel_weight(std::span<const double> a, std::span<const double> b, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("heat kernel sigma must be > 0");
  if (a.size() != b.size()) throw ShapeError("heat kernel spectra differ in length");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

namespace {

std::vector<Edge> knn_from_distances(const Matrix& dist, std::size_t k) {
  const auto n = static_cast<std::size_t>(dist.rows());
  std::vector<Edge> edges;
  if (n < 2) return edges;
  const std::size_t take = std::min(k, n - 1);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
                        const double db = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
                        return da < db || (da == db && a < b);
                      });
    for (std::size_t t = 0; t < take; ++t) edges.emplace_back(std::min(i, order[t]), std::max(i, order[t]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double median_upper_triangle(const Matrix& dist) {
  const auto n = dist.rows();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) values.push_back(dist(i, j));
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

SuperpixelBlock make_block(const Matrix& y, std::vector<std::size_t> pixels,
                           const GraphParams& params, Execution exec) {
  SuperpixelBlock block;
  const auto ns = static_cast<Eigen::Index>(pixels.size());
  const Matrix dist = kernels::pairwise_distances(exec, y, pixels);
  block.sigma = params.sigma ? *params.sigma : std::max(median_upper_triangle(dist), kSigmaFloor);
  block.adjacency = Matrix::Zero(ns, ns);
  const double denom = 2.0 * block.sigma * block.sigma;
  for (const auto& [i, j] : knn_from_distances(dist, params.k_neighbors)) {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    const double w = std::exp(-(dist(a, b) * dist(a, b)) / denom);
    block.adjacency(a, b) = w;
    block.adjacency(b, a) = w;
  }
  block.degree = block.adjacency.rowwise().sum();
  block.laplacian = -block.adjacency;
  block.laplacian.diagonal() += block.degree;
  block.pixels = std::move(pixels);
  return block;
}

}  // namespace

std::vector<Edge> knn_edges(const Matrix& spectra, std::size_t k) {
  std::vector<std::size_t> all(static_cast<std::size_t>(spectra.cols()));
  std::iota(all.begin(), all.end(), 0);
  return knn_from_distances(kernels::serial::pairwise_distances(spectra, all), k);
}

SuperpixelGraph build_graph(const Matrix& y, const std::vector<std::vector<std::size_t>>& regions,
                            const GraphParams& params, Execution exec) {
  params.validate();
  const auto n = static_cast<std::size_t>(y.cols());
  std::vector<int> covered(n, 0);
  for (const auto& region : regions) {
    for (const std::size_t p : region) {
      if (p >= n) throw ShapeError("region references pixel " + std::to_string(p) + " but Y has " +
                                   std::to_string(n) + " columns");
      ++covered[p];
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (covered[p] != 1) throw ShapeError("regions do not partition the pixels (pixel " + std::to_string(p) + ")");
  }

  SuperpixelGraph graph;
  graph.pixel_count = n;
  graph.blocks.resize(regions.size());
  const auto count = static_cast<std::ptrdiff_t>(regions.size());
  // The parallel path distributes whole blocks; a lone block parallelizes its
  // distance matrix instead.
  if (exec == Execution::kParallel && count == 1) {
    auto pixels = regions.front();
    std::sort(pixels.begin(), pixels.end());
    graph.blocks.front() = make_block(y, std::move(pixels), params, Execution::kParallel);
  } else if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t g = 0; g < count; ++g) {
      auto pixels = regions[static_cast<std::size_t>(g)];
      std::sort(pixels.begin(), pixels.end());
      graph.blocks[static_cast<std::size_t>(g)] = make_block(y, std::move(pixels), params, Execution::kSerial);
    }
  } else {
    for (std::ptrdiff_t g = 0; g < count; ++g) {
      auto pixels = regions[static_cast<std::size_t>(g)];
      std::sort(pixels.begin(), pixels.end());
      graph.blocks[static_cast<std::size_t>(g)] = make_block(y, std::move(pixels), params, Execution::kSerial);
    }
  }
  return graph;
}

SuperpixelGraph build_graph(const Matrix& y, const SuperpixelMap& map, const GraphParams& params,
                            Execution exec) {
  if (map.pixels() != static_cast<std::size_t>(y.cols())) {
    throw ShapeError("label map covers " + std::to_string(map.pixels()) + " pixels but Y has " +
                     std::to_string(y.cols()) + " columns");
  }
  return build_graph(y, map.regions(), params, exec);
}

}  // namespace sbglsu
