#include "sbglsu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sbglsu/errors.hpp"
#include "sbglsu/rng.hpp"

namespace sbglsu {

void SynthConfig::validate() const {
  if (height * width < 1) throw ParameterError("synthetic image must have at least one pixel");
  if (m_active < 1 || m_active > m_library) throw ParameterError("need 1 <= m_active <= m_library");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ParameterError("snr_db must be finite or +infinity");
  }
  if (patch_size < 1) throw ParameterError("patch_size must be >= 1");
}

namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

SpectralLibrary subset_library(const SpectralLibrary& full, std::size_t m_target, std::uint64_t seed) {
  if (m_target < 1 || m_target > full.size()) {
    throw ParameterError("cannot draw " + std::to_string(m_target) + " signatures from a library of " +
                         std::to_string(full.size()));
  }
  Rng rng(seed, Substream::kSubset);
  const auto ids = sample_without_replacement(full.size(), m_target, rng);
  Matrix cols(full.matrix().rows(), static_cast<Eigen::Index>(m_target));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    cols.col(static_cast<Eigen::Index>(j)) = full.matrix().col(static_cast<Eigen::Index>(ids[j]));
    names.push_back(full.names()[ids[j]]);
  }
  return SpectralLibrary(std::move(cols), std::move(names));
}

std::vector<std::size_t> choose_active(std::size_t m_library, std::size_t m_active, std::uint64_t seed) {
  if (m_active < 1 || m_active > m_library) throw ParameterError("need 1 <= m_active <= m_library");
  Rng rng(seed, Substream::kActive);
  return sample_without_replacement(m_library, m_active, rng);
}

AbundanceMatrix make_abundance_maps(const SynthConfig& config, const std::vector<std::size_t>& active_ids) {
  config.validate();
  if (active_ids.size() != config.m_active) {
    throw ParameterError("expected " + std::to_string(config.m_active) + " active ids, got " +
                         std::to_string(active_ids.size()));
  }
  for (const auto id : active_ids) {
    if (id >= config.m_library) throw ParameterError("active id out of library range");
  }
  const std::size_t h = config.height, w = config.width, k = config.m_active;
  const std::size_t ps = config.patch_size;
  Rng patches(config.seed, Substream::kPatches);
  Rng simplex(config.seed, Substream::kSimplex);

  // Abundances over the active set only (k x n); rows follow active_ids order.
  Matrix local = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(h * w));
  Vector fractions(static_cast<Eigen::Index>(k));
  for (std::size_t br = 0; br < h; br += ps) {
    for (std::size_t bc = 0; bc < w; bc += ps) {
      const auto dominant = static_cast<Eigen::Index>(patches.index(k));
      const double top = k == 1 ? 1.0 : patches.uniform(0.6, 1.0);
      fractions.setZero();
      fractions(dominant) = top;
      if (k > 1) {
        Vector draws(static_cast<Eigen::Index>(k - 1));
        for (Eigen::Index i = 0; i < draws.size(); ++i) draws(i) = simplex.exponential();
        draws /= draws.sum();
        Eigen::Index t = 0;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
          if (i != dominant) fractions(i) = (1.0 - top) * draws(t++);
        }
      }
      for (std::size_t r = br; r < std::min(br + ps, h); ++r)
        for (std::size_t c = bc; c < std::min(bc + ps, w); ++c)
          local.col(static_cast<Eigen::Index>(pixel_index(r, c, w))) = fractions;
    }
  }

  // 3x3 binomial kernel (centre weight 1/4), renormalized over in-bounds taps.
  static constexpr double kTap[3] = {1.0, 2.0, 1.0};
  Matrix blurred(local.rows(), local.cols());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      Vector acc = Vector::Zero(local.rows());
      double total = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const auto nr = static_cast<std::ptrdiff_t>(r) + dr;
          const auto nc = static_cast<std::ptrdiff_t>(c) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(h) || nc >= static_cast<std::ptrdiff_t>(w)) continue;
          const double wt = kTap[dr + 1] * kTap[dc + 1];
          acc += wt * local.col(static_cast<Eigen::Index>(pixel_index(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc), w)));
          total += wt;
        }
      }
      acc /= total;
      acc /= acc.sum();
      blurred.col(static_cast<Eigen::Index>(pixel_index(r, c, w))) = acc;
    }
  }

  AbundanceMatrix out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(config.m_library), static_cast<Eigen::Index>(h * w));
  for (std::size_t i = 0; i < k; ++i) {
    out.values.row(static_cast<Eigen::Index>(active_ids[i])) = blurred.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

HsiCube mix_and_noise(const Matrix& a, const Matrix& s_true, std::size_t height, std::size_t width,
                      double snr_db, std::uint64_t seed) {
  if (a.cols() != s_true.rows()) throw ShapeError("library and abundance dimensions differ");
  if (static_cast<std::size_t>(s_true.cols()) != height * width) {
    throw ShapeError("abundance matrix does not have height*width columns");
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ParameterError("snr_db must be finite or +infinity");
  }
  Matrix y = a * s_true;
  if (std::isinf(snr_db)) return matrix_to_cube(y, height, width);

  const double signal = y.squaredNorm();
  if (!(signal > 0.0)) throw ParameterError("SNR is undefined for an all-zero clean signal");
  Rng rng(seed, Substream::kNoise);
  Matrix noise(y.rows(), y.cols());
  // Column-major fill: bands of pixel 0, then pixel 1, ...
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  const double scale = std::sqrt(signal / (noise.squaredNorm() * std::pow(10.0, snr_db / 10.0)));
  y += scale * noise;
  return matrix_to_cube(y, height, width);
}

SpectralLibrary make_synthetic_library(std::size_t bands, std::size_t count, std::uint64_t seed) {
  if (bands < 1 || count < 1) throw ParameterError("synthetic library needs bands >= 1 and count >= 1");
  Rng rng(seed, Substream::kLibrary);
  Matrix sig(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(count));
  std::vector<std::string> names;
  const double span = std::max<double>(1.0, static_cast<double>(bands - 1));
  for (std::size_t j = 0; j < count; ++j) {
    const double level = rng.uniform(0.3, 0.8);
    const double slope = rng.uniform(-0.3, 0.3);
    const std::size_t features = 2 + static_cast<std::size_t>(rng.index(5));
    std::vector<double> centre(features), width(features), depth(features);
    for (std::size_t f = 0; f < features; ++f) {
      centre[f] = rng.uniform(0.0, 1.0);
      width[f] = rng.uniform(0.01, 0.08);
      depth[f] = rng.uniform(0.1, 0.6);
    }
    for (std::size_t b = 0; b < bands; ++b) {
      const double x = static_cast<double>(b) / span;
      double v = level + slope * (x - 0.5);
      for (std::size_t f = 0; f < features; ++f) {
        const double z = (x - centre[f]) / width[f];
        v *= 1.0 - depth[f] * std::exp(-0.5 * z * z);
      }
      sig(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = std::clamp(v, 1e-3, 1.0);
    }
    std::string name = std::to_string(j);
    names.push_back("syn_" + std::string(4 - std::min<std::size_t>(4, name.size()), '0') + name);
  }
  return SpectralLibrary(std::move(sig), std::move(names));
}

SyntheticScene generate_scene(const SpectralLibrary& full_library, const SynthConfig& config) {
  config.validate();
  SyntheticScene scene;
  scene.library = subset_library(full_library, config.m_library, config.seed);
  scene.active_ids = choose_active(config.m_library, config.m_active, config.seed);
  scene.truth = make_abundance_maps(config, scene.active_ids);
  scene.clean = scene.library.matrix() * scene.truth.values;
  scene.cube = mix_and_noise(scene.library.matrix(), scene.truth.values, config.height, config.width,
                             config.snr_db, config.seed);
  return scene;
}

}  // namespace sbglsu
