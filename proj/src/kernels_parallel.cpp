#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kernels_detail.hpp"
#include "sbglsu/errors.hpp"
#include "sbglsu/kernels.hpp"

namespace sbglsu::kernels::omp {

// Pixel-centric assignment: each pixel gathers candidate centers from the
// 3x3 neighbouring buckets and keeps the (distance, index) minimum.
std::size_t slic_assign(const HsiCube& cube, const SlicCenters& centers,
                        const CenterBuckets& buckets, const SlicWindow& window,
                        std::span<std::int32_t> labels) {
  const auto h = static_cast<std::ptrdiff_t>(cube.height());
  const auto w = static_cast<std::ptrdiff_t>(cube.width());
  const double step = static_cast<double>(window.step);
  const auto grid_rows = static_cast<std::ptrdiff_t>(buckets.grid_rows);
  const auto grid_cols = static_cast<std::ptrdiff_t>(buckets.grid_cols);
  const auto bstep = static_cast<std::ptrdiff_t>(buckets.step);
  std::size_t changed = 0;

#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    const std::ptrdiff_t br = r / bstep;
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      const std::ptrdiff_t bc = c / bstep;
      const std::size_t p = pixel_index(static_cast<std::size_t>(r), static_cast<std::size_t>(c),
                                        static_cast<std::size_t>(w));
      double best = INFINITY;
      std::int32_t label = -1;
      for (std::ptrdiff_t gr = std::max<std::ptrdiff_t>(br - 1, 0);
           gr <= std::min(br + 1, grid_rows - 1); ++gr) {
        for (std::ptrdiff_t gc = std::max<std::ptrdiff_t>(bc - 1, 0);
             gc <= std::min(bc + 1, grid_cols - 1); ++gc) {
          for (const std::int32_t k : buckets.cells[static_cast<std::size_t>(gr * grid_cols + gc)]) {
            const auto ku = static_cast<std::size_t>(k);
            if (!detail::in_window(static_cast<std::size_t>(r), static_cast<std::size_t>(c), centers, ku, step)) continue;
            const double d = detail::slic_distance(cube, p, static_cast<std::size_t>(r),
                                                   static_cast<std::size_t>(c), centers, ku,
                                                   window.spatial_weight);
            if (d < best || (d == best && k < label)) {
              best = d;
              label = k;
            }
          }
        }
      }
      if (label < 0) {
        label = labels[p] >= 0 ? labels[p]
                               : detail::nearest_center_spatial(static_cast<std::size_t>(r),
                                                                static_cast<std::size_t>(c), centers);
      }
      if (label != labels[p]) ++changed;
      labels[p] = label;
    }
  }
  return changed;
}

void slic_update_centers(const HsiCube& cube, std::span<const std::int32_t> labels,
                         SlicCenters& centers) {
  const std::size_t k = centers.size();
  const std::size_t w = cube.width();
  const std::size_t bands = cube.bands();
  // Counting sort of pixels by label keeps each center's members in ascending
  // pixel order, matching the serial accumulation order exactly.
  std::vector<std::size_t> offset(k + 1, 0);
  for (const auto l : labels) ++offset[static_cast<std::size_t>(l) + 1];
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<std::size_t> members(labels.size());
  {
    std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
    for (std::size_t p = 0; p < labels.size(); ++p) members[cursor[static_cast<std::size_t>(labels[p])]++] = p;
  }

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t js = 0; js < static_cast<std::ptrdiff_t>(k); ++js) {
    const auto j = static_cast<std::size_t>(js);
    const std::size_t begin = offset[j];
    const std::size_t end = offset[j + 1];
    if (begin == end) continue;
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(bands));
    double rsum = 0.0, csum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t p = members[i];
      const auto spec = cube.spectrum(p);
      for (std::size_t b = 0; b < bands; ++b) sum(static_cast<Eigen::Index>(b)) += spec[b];
      rsum += static_cast<double>(p / w);
      csum += static_cast<double>(p % w);
    }
    const double n = static_cast<double>(end - begin);
    centers.spectra.col(static_cast<Eigen::Index>(j)) = sum / n;
    centers.row[j] = rsum / n;
    centers.col[j] = csum / n;
  }
}

void soft_threshold(const Matrix& x, const Matrix& threshold, Matrix& out) {
  if (x.rows() != threshold.rows() || x.cols() != threshold.cols()) {
    throw ShapeError("soft_threshold: operand and threshold shapes differ");
  }
  out.resize(x.rows(), x.cols());
  const auto size = static_cast<std::ptrdiff_t>(x.size());
  const double* xs = x.data();
  const double* ts = threshold.data();
  double* os = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < size; ++i) os[i] = detail::soft(xs[i], ts[i]);
}

void graph_block_solve(const Matrix& rhs, double scale, std::span<const GraphBlockFactor> blocks,
                       Matrix& out) {
  out.resize(rhs.rows(), rhs.cols());
  const auto count = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t g = 0; g < count; ++g) {
    detail::solve_block(rhs, scale, blocks[static_cast<std::size_t>(g)], out);
  }
}

Matrix pairwise_distances(const Matrix& y, std::span<const std::size_t> columns) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  const auto bands = static_cast<std::size_t>(y.rows());
  Matrix d = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::sqrt(detail::squared_distance(
          y.col(static_cast<Eigen::Index>(columns[i])).data(),
          y.col(static_cast<Eigen::Index>(columns[j])).data(), bands));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

}  // namespace sbglsu::kernels::omp
