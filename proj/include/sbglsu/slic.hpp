#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbglsu/hsi_core.hpp"
#include "sbglsu/kernels.hpp"

namespace sbglsu {

struct SlicParams {
  std::size_t superpixel_size = 8;   // target side length in pixels
  double compactness = 2e-3;         // weight of the normalized spatial distance
  std::size_t max_iters = 10;
  double min_region_fraction = 0.25; // regions below this fraction of size^2 are merged

  void validate() const;
};

/// Dense partition of an image into n_g labelled regions.
class SuperpixelMap {
 public:
  SuperpixelMap() = default;
  // Throws FormatError unless labels cover [0, n_g) densely.
  SuperpixelMap(std::size_t height, std::size_t width, std::vector<std::uint32_t> labels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return labels_.size(); }
  std::size_t region_count() const noexcept { return region_count_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t label(std::size_t row, std::size_t col) const {
    return labels_[pixel_index(row, col, width_)];
  }

  // Pixel ids of every region, ascending within each region.
  std::vector<std::vector<std::size_t>> regions() const;

  bool operator==(const SuperpixelMap&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t region_count_ = 0;
  std::vector<std::uint32_t> labels_;
};

/// SLIC on full spectra: localized k-means with combined distance
/// ||y_p - c_k|| + compactness * ||x_p - x_k|| / superpixel_size.
SuperpixelMap segment(const HsiCube& cube, const SlicParams& params,
                      Execution exec = Execution::kParallel);

/// Splits disconnected labels into 4-connected components, merges components
/// smaller than min_region_fraction * size^2 into their largest neighbour, and
/// relabels densely in row-major order of first appearance.
SuperpixelMap enforce_connectivity(std::span<const std::int32_t> labels, std::size_t height,
                                   std::size_t width, const SlicParams& params);

}  // namespace sbglsu
