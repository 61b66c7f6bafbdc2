#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbglsu::cli {

namespace fs = std::filesystem;

/// Bad flag combination detected after parsing; reported with the subcommand help.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// $SBGLSU_OUTPUT_ROOT/<name>, or ./sbglsu_out/<name> when unset.
fs::path default_output(const std::string& name);

struct GenLibraryOptions {
  std::size_t bands = 224;
  std::size_t count = 480;
  std::uint64_t seed = 0;
  fs::path out;
};

struct SynthOptions {
  std::optional<fs::path> library;
  std::string preset;  // "", "dc1" or "dc2"
  std::size_t height = 75;
  std::size_t width = 75;
  std::size_t m_library = 240;
  std::size_t m_active = 5;
  std::size_t patch_size = 10;
  double snr_db = 30.0;  // "inf" on the command line disables noise
  std::uint64_t seed = 0;
  std::size_t synthetic_bands = 224;
  fs::path out;
};

struct SegmentOptions {
  fs::path cube;
  std::size_t size = 8;
  double compactness = 2e-3;
  fs::path out;
};

struct UnmixOptions {
  fs::path cube;
  fs::path library;
  std::optional<fs::path> labels;
  std::optional<double> lambda_s;
  std::optional<double> lambda_g;
  std::string weights_preset;  // e.g. "dc1-30"
  double mu = 0.1;
  double eps = 1e-3;
  std::size_t outer = 60;
  std::size_t inner = 8;
  double tol = 0.0;
  std::size_t knn = 4;
  std::string sigma = "median";
  std::size_t size = 8;          // SLIC settings used when --labels is absent
  double compactness = 2e-3;
  std::optional<fs::path> truth;
  std::vector<std::size_t> maps;
  bool serial = false;
  fs::path out;
};

struct EvalOptions {
  fs::path truth;
  fs::path est;
  std::string format = "csv";
  std::optional<fs::path> out;
};

struct SweepOptions {
  fs::path grid;
  UnmixOptions unmix;  // lambda values come from the grid
};

int run_gen_library(const GenLibraryOptions& opt);
int run_synth(const SynthOptions& opt);
int run_segment(const SegmentOptions& opt);
int run_unmix(const UnmixOptions& opt);
int run_eval(const EvalOptions& opt);
int run_sweep(const SweepOptions& opt);

}  // namespace sbglsu::cli
