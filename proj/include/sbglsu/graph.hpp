#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sbglsu/hsi_core.hpp"
#include "sbglsu/kernels.hpp"
#include "sbglsu/slic.hpp"

namespace sbglsu {

struct GraphParams {
  std::size_t k_neighbors = 4;
  // Fixed heat-kernel width; nullopt selects the per-superpixel median of
  // pairwise spectral distances.
  std::optional<double> sigma;

  void validate() const;
};

inline constexpr double kSigmaFloor = 1e-12;

/// Similarity graph of one superpixel. Matrices are indexed by position in
/// `pixels`, which holds global pixel ids in ascending order.
struct SuperpixelBlock {
  std::vector<std::size_t> pixels;
  Matrix adjacency;   // W_g: symmetric, zero diagonal, entries in [0, 1]
  Vector degree;      // diag(D_g)
  Matrix laplacian;   // L_g = D_g - W_g
  double sigma = 0.0;
};

/// Block-diagonal graph over all pixels of an image.
struct SuperpixelGraph {
  std::size_t pixel_count = 0;
  std::vector<SuperpixelBlock> blocks;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// exp(-||a - b||^2 / (2 sigma^2)). Throws ParameterError for sigma <= 0.
double heat_kernel_weight(std::span<const double> a, std::span<const double> b, double sigma);

/// Union-symmetrized K-nearest-neighbour edges among the columns of
/// `spectra`, returned as (i, j) with i < j in lexicographic order. Distance
/// ties go to the lower node index.
std::vector<Edge> knn_edges(const Matrix& spectra, std::size_t k);

/// Per-region graphs for an arbitrary partition of Y's columns.
SuperpixelGraph build_graph(const Matrix& y, const std::vector<std::vector<std::size_t>>& regions,
                            const GraphParams& params, Execution exec = Execution::kParallel);

SuperpixelGraph build_graph(const Matrix& y, const SuperpixelMap& map, const GraphParams& params,
                            Execution exec = Execution::kParallel);

}  // namespace sbglsu
