#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sbglsu/admm.hpp"
#include "sbglsu/hsi_core.hpp"
#include "sbglsu/metrics.hpp"
#include "sbglsu/slic.hpp"

namespace sbglsu::io {

namespace fs = std::filesystem;

/// Sidecar header of a binary cube: payload is height*width*bands
/// little-endian doubles, band-interleaved-by-pixel, row-major pixels.
struct CubeHeader {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::string dtype = "f64le";
  std::string interleave = "bip";
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t payload_bytes() const noexcept { return height * width * bands * 8; }
};

// Shortest decimal form guaranteed to round-trip a double (17 significant digits).
std::string format_real(double value);

// "cube.bin" -> "cube.hdr.json"
fs::path header_path_for(const fs::path& payload);

/// Library CSV: a header row of m names, then one row of m values per band.
SpectralLibrary load_library(const fs::path& path);
void save_library(const SpectralLibrary& library, const fs::path& path);

CubeHeader read_cube_header(const fs::path& payload);
HsiCube load_cube(const fs::path& payload);
void save_cube(const HsiCube& cube, const fs::path& payload,
               const nlohmann::json& metadata = nlohmann::json::object());
/// Headerless BIP f64le payload with caller-supplied dimensions.
HsiCube load_raw_cube(const fs::path& payload, std::size_t height, std::size_t width, std::size_t bands);

/// Label CSV: `height` rows of `width` unsigned labels.
SuperpixelMap load_labels(const fs::path& path);
void save_labels(const SuperpixelMap& map, const fs::path& path);

/// Dense real matrix as CSV, one matrix row per line (abundances: m rows x n pixels).
Matrix load_matrix_csv(const fs::path& path);
void save_matrix_csv(const Matrix& mat, const fs::path& path);

/// 8-bit binary PGM of endmember `index` (value = round(255 * clamp(s, 0, 1)),
/// halves rounded up) plus the exact values as "<stem>.csv" next to it.
void save_abundance_pgm(const Matrix& s, std::size_t index, const fs::path& path, std::size_t height,
                        std::size_t width);

/// Columns: outer_iter, objective, rmse (rmse empty without ground truth).
void write_convergence_csv(const ConvergenceRecord& record, std::ostream& out);
void write_convergence_csv(const ConvergenceRecord& record, const fs::path& path);

enum class ReportFormat { kCsv, kJson };
void write_report(const EvalReport& report, std::ostream& out, ReportFormat format);

void write_json(const nlohmann::json& doc, const fs::path& path);

}  // namespace sbglsu::io
