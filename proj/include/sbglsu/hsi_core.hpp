#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sbglsu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Pixel index convention used everywhere (labels, Y columns, S columns):
// pixel (row, col) has index row * width + col.
constexpr std::size_t pixel_index(std::size_t row, std::size_t col, std::size_t width) {
  return row * width + col;
}

/// Hyperspectral image of height x width pixels with `bands` values each.
/// Storage is band-interleaved-by-pixel: all bands of pixel 0, then pixel 1, ...
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t height, std::size_t width, std::size_t bands, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t pixels() const noexcept { return height_ * width_; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> spectrum(std::size_t pixel) const {
    return std::span<const double>(data_).subspan(pixel * bands_, bands_);
  }
  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return data_[pixel_index(row, col, width_) * bands_ + band];
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> data_;
};

/// Endmember library A (bands x m) with one name per column.
class SpectralLibrary {
 public:
  SpectralLibrary() = default;
  SpectralLibrary(Matrix signatures, std::vector<std::string> names);

  std::size_t bands() const noexcept { return static_cast<std::size_t>(signatures_.rows()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(signatures_.cols()); }
  const Matrix& matrix() const noexcept { return signatures_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  Matrix signatures_;
  std::vector<std::string> names_;
};

/// Abundance matrix S (m endmembers x n pixels).
struct AbundanceMatrix {
  Matrix values;

  std::size_t endmembers() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Observation matrix Y (bands x pixels); column i is the spectrum of pixel i.
Matrix cube_to_matrix(const HsiCube& cube);

/// Inverse of cube_to_matrix. Throws ShapeError unless mat has height*width columns.
HsiCube matrix_to_cube(const Matrix& mat, std::size_t height, std::size_t width);

bool all_finite(std::span<const double> values) noexcept;

}  // namespace sbglsu
