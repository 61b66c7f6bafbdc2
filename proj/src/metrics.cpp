#include "sbglsu/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "sbglsu/errors.hpp"

namespace sbglsu {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("abundance matrices differ in shape: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace

std::string SreValue::to_string() const {
  if (infinite_) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", db_);
  return buf;
}

SreValue sre(const Matrix& truth, const Matrix& estimate) {
  require_same_shape(truth, estimate);
  const double signal = truth.squaredNorm();
  if (!(signal > 0.0)) throw MetricError("SRE is undefined for an all-zero ground truth");
  const double error = (truth - estimate).squaredNorm();
  if (error == 0.0) return SreValue::infinite();
  return SreValue::finite(10.0 * std::log10(signal / error));
}

double rmse(const Matrix& truth, const Matrix& estimate) {
  require_same_shape(truth, estimate);
  if (truth.size() == 0) return 0.0;
  return std::sqrt((truth - estimate).squaredNorm() / static_cast<double>(truth.size()));
}

std::vector<double> per_endmember_rmse(const Matrix& truth, const Matrix& estimate) {
  require_same_shape(truth, estimate);
  std::vector<double> out(static_cast<std::size_t>(truth.rows()), 0.0);
  if (truth.cols() == 0) return out;
  for (Eigen::Index k = 0; k < truth.rows(); ++k) {
    out[static_cast<std::size_t>(k)] =
        std::sqrt((truth.row(k) - estimate.row(k)).squaredNorm() / static_cast<double>(truth.cols()));
  }
  return out;
}

EvalReport evaluate(const Matrix& truth, const Matrix& estimate) {
  EvalReport report;
  report.sre = sre(truth, estimate);
  report.rmse = rmse(truth, estimate);
  report.per_endmember_rmse = per_endmember_rmse(truth, estimate);
  return report;
}

Matrix endmember_map(const Matrix& s, std::size_t index, std::size_t height, std::size_t width) {
  if (index >= static_cast<std::size_t>(s.rows())) {
    throw ParameterError("endmember index " + std::to_string(index) + " out of range [0, " +
                         std::to_string(s.rows()) + ")");
  }
  if (static_cast<std::size_t>(s.cols()) != height * width) {
    throw ShapeError("abundance matrix does not have height*width columns");
  }
  Matrix image(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c)
      image(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          s(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(pixel_index(r, c, width)));
  return image;
}

}  // namespace sbglsu
