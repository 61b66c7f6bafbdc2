#include "sbglsu/hsi_core.hpp"

#include <algorithm>
#include <cmath>

#include "sbglsu/errors.hpp"

namespace sbglsu {

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

HsiCube::HsiCube(std::size_t height, std::size_t width, std::size_t bands, std::vector<double> data)
    : height_(height), width_(width), bands_(bands), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * bands_) {
    throw ShapeError("cube data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(height_) + "*" + std::to_string(width_) + "*" +
                     std::to_string(bands_));
  }
  if (!all_finite(data_)) throw ParameterError("cube contains non-finite values");
}

SpectralLibrary::SpectralLibrary(Matrix signatures, std::vector<std::string> names)
    : signatures_(std::move(signatures)), names_(std::move(names)) {
  if (signatures_.cols() < 1) throw ParameterError("library must hold at least one signature");
  if (names_.size() != static_cast<std::size_t>(signatures_.cols())) {
    throw ShapeError("library has " + std::to_string(signatures_.cols()) + " signatures but " +
                     std::to_string(names_.size()) + " names");
  }
  if (!signatures_.allFinite()) throw ParameterError("library contains non-finite values");
  for (Eigen::Index j = 0; j < signatures_.cols(); ++j) {
    if (!(signatures_.col(j).norm() > 0.0)) {
      throw ParameterError("library signature '" + names_[j] + "' has zero norm");
    }
  }
}

Matrix cube_to_matrix(const HsiCube& cube) {
  // BIP storage is exactly the column-major layout of a bands x pixels matrix.
  return Eigen::Map<const Matrix>(cube.data().data(), static_cast<Eigen::Index>(cube.bands()),
                                  static_cast<Eigen::Index>(cube.pixels()));
}

HsiCube matrix_to_cube(const Matrix& mat, std::size_t height, std::size_t width) {
  if (static_cast<std::size_t>(mat.cols()) != height * width) {
    throw ShapeError("matrix has " + std::to_string(mat.cols()) + " columns, expected " +
                     std::to_string(height * width));
  }
  std::vector<double> data(mat.data(), mat.data() + mat.size());
  return HsiCube(height, width, static_cast<std::size_t>(mat.rows()), std::move(data));
}

}  // namespace sbglsu
