#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kernels_detail.hpp"
#include "sbglsu/errors.hpp"
#include "sbglsu/kernels.hpp"

namespace sbglsu::kernels {

CenterBuckets CenterBuckets::build(const SlicCenters& centers, std::size_t height,
                                   std::size_t width, std::size_t step) {
  CenterBuckets b;
  b.step = step;
  b.grid_rows = (height + step - 1) / step;
  b.grid_cols = (width + step - 1) / step;
  b.cells.assign(b.grid_rows * b.grid_cols, {});
  const auto clamp_cell = [step](double pos, std::size_t count) {
    const double c = std::floor(std::max(pos, 0.0) / static_cast<double>(step));
    return std::min(static_cast<std::size_t>(c), count - 1);
  };
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const std::size_t r = clamp_cell(centers.row[k], b.grid_rows);
    const std::size_t c = clamp_cell(centers.col[k], b.grid_cols);
    b.cells[r * b.grid_cols + c].push_back(static_cast<std::int32_t>(k));
  }
  return b;
}

namespace serial {

// Reference formulation: the classic center-centric SLIC sweep. Each center
// scans its own window and claims pixels it is strictly closer to, so visiting
// centers in ascending order resolves ties toward the lower index.
std::size_t slic_assign(const HsiCube& cube, const SlicCenters& centers,
                        const CenterBuckets& /*buckets*/, const SlicWindow& window,
                        std::span<std::int32_t> labels) {
  const std::size_t h = cube.height();
  const std::size_t w = cube.width();
  const double step = static_cast<double>(window.step);
  std::vector<double> best(h * w, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> next(h * w, -1);

  for (std::size_t k = 0; k < centers.size(); ++k) {
    // Bounds are widened by one pixel; in_window() makes the exact decision.
    const double r_lo = std::max(0.0, std::floor(centers.row[k] - step) - 1.0);
    const double r_hi = std::min(static_cast<double>(h) - 1.0, std::ceil(centers.row[k] + step) + 1.0);
    const double c_lo = std::max(0.0, std::floor(centers.col[k] - step) - 1.0);
    const double c_hi = std::min(static_cast<double>(w) - 1.0, std::ceil(centers.col[k] + step) + 1.0);
    if (r_lo > r_hi || c_lo > c_hi) continue;
    for (auto r = static_cast<std::size_t>(r_lo); r <= static_cast<std::size_t>(r_hi); ++r) {
      for (auto c = static_cast<std::size_t>(c_lo); c <= static_cast<std::size_t>(c_hi); ++c) {
        if (!detail::in_window(r, c, centers, k, step)) continue;
        const std::size_t p = pixel_index(r, c, w);
        const double d = detail::slic_distance(cube, p, r, c, centers, k, window.spatial_weight);
        if (d < best[p]) {
          best[p] = d;
          next[p] = static_cast<std::int32_t>(k);
        }
      }
    }
  }

  std::size_t changed = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t p = pixel_index(r, c, w);
      std::int32_t label = next[p];
      if (label < 0) label = labels[p] >= 0 ? labels[p] : detail::nearest_center_spatial(r, c, centers);
      if (label != labels[p]) ++changed;
      labels[p] = label;
    }
  }
  return changed;
}

void slic_update_centers(const HsiCube& cube, std::span<const std::int32_t> labels,
                         SlicCenters& centers) {
  const std::size_t k = centers.size();
  const std::size_t bands = cube.bands();
  const std::size_t w = cube.width();
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(k));
  std::vector<double> rsum(k, 0.0), csum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const auto j = static_cast<std::size_t>(labels[p]);
    const auto spec = cube.spectrum(p);
    for (std::size_t b = 0; b < bands; ++b) sums(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) += spec[b];
    rsum[j] += static_cast<double>(p / w);
    csum[j] += static_cast<double>(p % w);
    ++count[j];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] == 0) continue;
    const double n = static_cast<double>(count[j]);
    centers.spectra.col(static_cast<Eigen::Index>(j)) = sums.col(static_cast<Eigen::Index>(j)) / n;
    centers.row[j] = rsum[j] / n;
    centers.col[j] = csum[j] / n;
  }
}

void soft_threshold(const Matrix& x, const Matrix& threshold, Matrix& out) {
  if (x.rows() != threshold.rows() || x.cols() != threshold.cols()) {
    throw ShapeError("soft_threshold: operand and threshold shapes differ");
  }
  out.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = detail::soft(x(i, j), threshold(i, j));
  }
}

void graph_block_solve(const Matrix& rhs, double scale, std::span<const GraphBlockFactor> blocks,
                       Matrix& out) {
  out.resize(rhs.rows(), rhs.cols());
  for (const auto& block : blocks) detail::solve_block(rhs, scale, block, out);
}

Matrix pairwise_distances(const Matrix& y, std::span<const std::size_t> columns) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  const auto bands = static_cast<std::size_t>(y.rows());
  Matrix d = Matrix::Zero(n, n);
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

}  // namespace serial
}  // namespace sbglsu::kernels
