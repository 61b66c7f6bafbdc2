#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "sbglsu/kernels.hpp"

namespace sbglsu::kernels::detail {

inline double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double slic_distance(const HsiCube& cube, std::size_t pixel, std::size_t row,
                            std::size_t col, const SlicCenters& centers, std::size_t k,
                            double spatial_weight) {
  const std::size_t bands = cube.bands();
  const double spectral =
      std::sqrt(squared_distance(cube.spectrum(pixel).data(), centers.spectra.col(k).data(), bands));
  const double dr = static_cast<double>(row) - centers.row[k];
  const double dc = static_cast<double>(col) - centers.col[k];
  return spectral + spatial_weight * std::sqrt(dr * dr + dc * dc);
}

inline bool in_window(std::size_t row, std::size_t col, const SlicCenters& centers, std::size_t k,
                      double step) {
  return std::abs(static_cast<double>(row) - centers.row[k]) <= step &&
         std::abs(static_cast<double>(col) - centers.col[k]) <= step;
}

inline std::int32_t nearest_center_spatial(std::size_t row, std::size_t col,
                                           const SlicCenters& centers) {
  std::int32_t best = 0;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double dr = static_cast<double>(row) - centers.row[k];
    const double dc = static_cast<double>(col) - centers.col[k];
    const double d = dr * dr + dc * dc;
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::int32_t>(k);
    }
  }
  return best;
}

inline void solve_block(const Matrix& rhs, double scale, const GraphBlockFactor& block,
                        Matrix& out) {
  const auto m = rhs.rows();
  const auto ns = static_cast<Eigen::Index>(block.pixels.size());
  // Rows of V_g solve V_g M = scale * X_g with M symmetric, i.e. M V_g^T = scale * X_g^T.
  Matrix xt(ns, m);
  for (Eigen::Index j = 0; j < ns; ++j) xt.row(j) = rhs.col(static_cast<Eigen::Index>(block.pixels[j])).transpose();
  xt *= scale;
  block.factor.solveInPlace(xt);
  for (Eigen::Index j = 0; j < ns; ++j) out.col(static_cast<Eigen::Index>(block.pixels[j])) = xt.row(j).transpose();
}

inline double soft(double x, double t) {
  const double mag = std::abs(x) - t;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

}  // namespace sbglsu::kernels::detail
