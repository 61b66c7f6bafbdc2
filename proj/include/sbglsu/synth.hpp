#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "sbglsu/hsi_core.hpp"

namespace sbglsu {

struct SynthConfig {
  std::size_t height = 75;
  std::size_t width = 75;
  std::size_t m_library = 240;
  std::size_t m_active = 5;
  double snr_db = 30.0;  // +infinity disables noise
  std::uint64_t seed = 0;
  std::size_t patch_size = 10;

  void validate() const;
};

/// Seeded sample of m_target signatures without replacement, kept in their
/// original library order.
SpectralLibrary subset_library(const SpectralLibrary& full, std::size_t m_target, std::uint64_t seed);

/// Seeded choice of m_active distinct ids in [0, m_library), ascending.
std::vector<std::size_t> choose_active(std::size_t m_library, std::size_t m_active, std::uint64_t seed);

/// Ground-truth abundances (m_library x height*width) obeying ANC and ASC.
/// Each patch_size block gets a dominant active endmember at abundance
/// U[0.6, 1] with the remainder spread by a flat Dirichlet draw, then a 3x3
/// Gaussian blur and per-pixel renormalization smooth the block edges.
AbundanceMatrix make_abundance_maps(const SynthConfig& config, const std::vector<std::size_t>& active_ids);

/// Y = A S + N with N white Gaussian noise rescaled so the realized SNR
/// equals snr_db exactly. snr_db = +infinity returns the clean product.
HsiCube mix_and_noise(const Matrix& a, const Matrix& s_true, std::size_t height, std::size_t width,
                      double snr_db, std::uint64_t seed);

/// Smooth reflectance-like signatures for exercising the pipeline without a
/// measured library: a sloped continuum with Gaussian absorption features,
/// values in (0, 1].
SpectralLibrary make_synthetic_library(std::size_t bands, std::size_t count, std::uint64_t seed);

struct SyntheticScene {
  SpectralLibrary library;            // the m_library subset used for unmixing
  std::vector<std::size_t> active_ids;
  AbundanceMatrix truth;
  Matrix clean;
  HsiCube cube;
};

SyntheticScene generate_scene(const SpectralLibrary& full_library, const SynthConfig& config);

}  // namespace sbglsu
