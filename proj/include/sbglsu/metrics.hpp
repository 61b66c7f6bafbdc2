#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sbglsu/hsi_core.hpp"

namespace sbglsu {

/// Signal-to-reconstruction error in dB. An exact reconstruction is carried
/// as an explicit "infinite" flag rather than a floating-point overflow.
class SreValue {
 public:
  static SreValue finite(double db) { return SreValue(db, false); }
  static SreValue infinite() { return SreValue(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  double db() const noexcept { return infinite_ ? INFINITY : db_; }
  std::string to_string() const;

 private:
  SreValue(double db, bool infinite) : db_(db), infinite_(infinite) {}
  double db_;
  bool infinite_;
};

struct EvalReport {
  SreValue sre = SreValue::infinite();
  double rmse = 0.0;
  std::vector<double> per_endmember_rmse;
};

// 10 log10(||S||^2 / ||S - S_est||^2). MetricError for an all-zero truth.
SreValue sre(const Matrix& truth, const Matrix& estimate);

// sqrt(||S - S_est||_F^2 / (m n))
double rmse(const Matrix& truth, const Matrix& estimate);

std::vector<double> per_endmember_rmse(const Matrix& truth, const Matrix& estimate);

EvalReport evaluate(const Matrix& truth, const Matrix& estimate);

/// Row `index` of S as a height x width image (row-major pixel order).
Matrix endmember_map(const Matrix& s, std::size_t index, std::size_t height, std::size_t width);

}  // namespace sbglsu
