#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp with the same
// signature; both produce bit-identical results (no cross-thread
// floating-point reductions), which the test suite checks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "sbglsu/hsi_core.hpp"

namespace sbglsu {

enum class Execution { kSerial, kParallel };

namespace kernels {

/// Current SLIC cluster centers: spectra (bands x k) plus sub-pixel positions.
struct SlicCenters {
  Matrix spectra;
  std::vector<double> row;
  std::vector<double> col;

  std::size_t size() const noexcept { return row.size(); }
};

/// Centers bucketed on a step x step grid so a pixel only scans the 3x3
/// neighbouring cells for candidates inside its search window.
struct CenterBuckets {
  std::size_t step = 1;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  std::vector<std::vector<std::int32_t>> cells;

  static CenterBuckets build(const SlicCenters& centers, std::size_t height, std::size_t width,
                             std::size_t step);
};

struct SlicWindow {
  std::size_t step = 1;          // superpixel side length; window is +-step around a center
  double spatial_weight = 0.0;   // compactness / step
};

/// Per-superpixel Cholesky factor of (2 lambda_g L_g + mu I) with the global
/// pixel ids (columns of S) it applies to.
struct GraphBlockFactor {
  std::vector<std::size_t> pixels;
  Eigen::LLT<Matrix> factor;
};

namespace serial {

// Assigns every pixel to the nearest center within the window (ties go to
// the lower center index). Pixels with no candidate keep their label, or take
// the spatially nearest center when still unlabeled (-1). Returns the number
// of labels that changed.
std::size_t slic_assign(const HsiCube& cube, const SlicCenters& centers,
                        const CenterBuckets& buckets, const SlicWindow& window,
                        std::span<std::int32_t> labels);

// Moves each center to the mean spectrum and position of its pixels, summing
// members in ascending pixel order. Empty clusters keep their center.
void slic_update_centers(const HsiCube& cube, std::span<const std::int32_t> labels,
                         SlicCenters& centers);

// out = sign(x) * max(|x| - t, 0), entrywise.
void soft_threshold(const Matrix& x, const Matrix& threshold, Matrix& out);

// For every block g: out_g = scale * rhs_g * (2 lambda_g L_g + mu I)^-1.
void graph_block_solve(const Matrix& rhs, double scale, std::span<const GraphBlockFactor> blocks,
                       Matrix& out);

// Symmetric matrix of Euclidean distances between the given columns of y.
Matrix pairwise_distances(const Matrix& y, std::span<const std::size_t> columns);

}  // namespace serial

namespace omp {

std::size_t slic_assign(const HsiCube& cube, const SlicCenters& centers,
                        const CenterBuckets& buckets, const SlicWindow& window,
                        std::span<std::int32_t> labels);
void slic_update_centers(const HsiCube& cube, std::span<const std::int32_t> labels,
                         SlicCenters& centers);
void soft_threshold(const Matrix& x, const Matrix& threshold, Matrix& out);
void graph_block_solve(const Matrix& rhs, double scale, std::span<const GraphBlockFactor> blocks,
                       Matrix& out);
Matrix pairwise_distances(const Matrix& y, std::span<const std::size_t> columns);

}  // namespace omp

inline std::size_t slic_assign(Execution exec, const HsiCube& cube, const SlicCenters& centers,
                               const CenterBuckets& buckets, const SlicWindow& window,
                               std::span<std::int32_t> labels) {
  return exec == Execution::kSerial ? serial::slic_assign(cube, centers, buckets, window, labels)
                                    : omp::slic_assign(cube, centers, buckets, window, labels);
}

inline void slic_update_centers(Execution exec, const HsiCube& cube,
                                std::span<const std::int32_t> labels, SlicCenters& centers) {
  exec == Execution::kSerial ? serial::slic_update_centers(cube, labels, centers)
                             : omp::slic_update_centers(cube, labels, centers);
}

inline void soft_threshold(Execution exec, const Matrix& x, const Matrix& threshold, Matrix& out) {
  exec == Execution::kSerial ? serial::soft_threshold(x, threshold, out)
                             : omp::soft_threshold(x, threshold, out);
}

inline void graph_block_solve(Execution exec, const Matrix& rhs, double scale,
                              std::span<const GraphBlockFactor> blocks, Matrix& out) {
  exec == Execution::kSerial ? serial::graph_block_solve(rhs, scale, blocks, out)
                             : omp::graph_block_solve(rhs, scale, blocks, out);
}

inline Matrix pairwise_distances(Execution exec, const Matrix& y,
                                 std::span<const std::size_t> columns) {
  return exec == Execution::kSerial ? serial::pairwise_distances(y, columns)
                                    : omp::pairwise_distances(y, columns);
}

}  // namespace kernels
}  // namespace sbglsu
