#include <cmath>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace sbglsu::cli;

namespace {

void add_unmix_flags(CLI::App* cmd, UnmixOptions& o, bool with_lambdas) {
  cmd->add_option("--cube", o.cube, "Binary cube (its .hdr.json sidecar is read too)")->required();
  cmd->add_option("--library", o.library, "Spectral library CSV")->required();
  cmd->add_option("--labels", o.labels, "Superpixel label CSV; segmented with --size/--compactness when omitted");
  if (with_lambdas) {
    cmd->add_option("--lambda-s", o.lambda_s, "Sparsity weight");
    cmd->add_option("--lambda-g", o.lambda_g, "Graph weight (0 gives the weighted-l1 baseline)");
    cmd->add_option("--weights-preset", o.weights_preset, "Standard DC1/DC2 weights for an SNR: dc1-20 .. dc2-40")
        ->check(CLI::IsMember({"dc1-20", "dc1-30", "dc1-40", "dc2-20", "dc2-30", "dc2-40"}));
  }
  cmd->add_option("--mu", o.mu, "ADMM penalty")->capture_default_str();
  cmd->add_option("--eps", o.eps, "Reweighting stabilizer")->capture_default_str();
  cmd->add_option("--outer", o.outer, "Outer (reweighting) iterations")->capture_default_str();
  cmd->add_option("--inner", o.inner, "Inner ADMM iterations")->capture_default_str();
  cmd->add_option("--tol", o.tol, "Early-stop threshold on relative change of S (0 runs all iterations)")
      ->capture_default_str();
  cmd->add_option("--knn", o.knn, "Neighbours per pixel in the superpixel graphs")->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "Heat-kernel width: 'median' or a positive number")->capture_default_str();
  cmd->add_option("--size", o.size, "SLIC superpixel size when --labels is omitted")->capture_default_str();
  cmd->add_option("--compactness", o.compactness, "SLIC compactness when --labels is omitted")
      ->capture_default_str();
  cmd->add_option("--truth", o.truth, "Ground-truth abundance CSV (adds RMSE to the convergence log)");
  cmd->add_option("--maps", o.maps, "Endmember indices to render as PGM, e.g. 0,3")->delimiter(',');
  cmd->add_flag("--serial", o.serial, "Use the single-threaded reference kernels");
  cmd->add_option("--out", o.out, "Output directory (default $SBGLSU_OUTPUT_ROOT/<command>)");
}

double parse_snr(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || std::isnan(v) || v == -INFINITY)
    throw UsageError("--snr must be a number of dB or 'inf', got '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel graph-regularized sparse hyperspectral unmixing"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", SBGLSU_VERSION);

  GenLibraryOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-library", "Write a synthetic reflectance-like spectral library");
  gen_cmd->add_option("--bands", gen.bands)->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of signatures")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Library CSV path");

  SynthOptions synth;
  std::string snr_text = "30";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic scene with ground truth");
  synth_cmd->add_option("--library", synth.library, "Library CSV to sample from (synthetic when omitted)");
  synth_cmd->add_option("--preset", synth.preset, "dc1: 75x75, 5 active; dc2: 100x100, 9 active")
      ->check(CLI::IsMember({"dc1", "dc2"}));
  auto* height_opt = synth_cmd->add_option("--height", synth.height)->capture_default_str();
  auto* width_opt = synth_cmd->add_option("--width", synth.width)->capture_default_str();
  auto* active_opt = synth_cmd->add_option("--m-active", synth.m_active, "Active endmembers")->capture_default_str();
  synth_cmd->add_option("--m-library", synth.m_library, "Signatures drawn into the unmixing library")
      ->capture_default_str();
  synth_cmd->add_option("--patch-size", synth.patch_size, "Side of the abundance patches")->capture_default_str();
  synth_cmd->add_option("--snr", snr_text, "Noise level in dB, or 'inf'")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--bands", synth.synthetic_bands, "Bands of the synthetic library when --library is omitted")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory");

  SegmentOptions seg;
  auto* seg_cmd = app.add_subcommand("segment", "SLIC superpixels of a cube");
  seg_cmd->add_option("--cube", seg.cube)->required();
  seg_cmd->add_option("--size", seg.size, "Superpixel side length")->capture_default_str();
  seg_cmd->add_option("--compactness", seg.compactness)->capture_default_str();
  seg_cmd->add_option("--out", seg.out, "Label CSV path");

  UnmixOptions unmix;
  auto* unmix_cmd = app.add_subcommand("unmix", "Estimate abundances");
  add_unmix_flags(unmix_cmd, unmix, true);

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "SRE and RMSE of an estimate");
  eval_cmd->add_option("--truth", ev.truth)->required();
  eval_cmd->add_option("--est", ev.est)->required();
  eval_cmd->add_option("--format", ev.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Report path (stdout when omitted)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Unmix over a grid of (lambda_s, lambda_g) pairs");
  sweep_cmd->add_option("--grid", sweep.grid, "File of 'lambda_s,lambda_g' lines")->required();
  add_unmix_flags(sweep_cmd, sweep.unmix, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == gen_cmd) return run_gen_library(gen);
    if (active == synth_cmd) {
      synth.snr_db = parse_snr(snr_text);
      if (synth.preset == "dc1" || synth.preset == "dc2") {
        const bool dc1 = synth.preset == "dc1";
        if (!height_opt->count()) synth.height = dc1 ? 75 : 100;
        if (!width_opt->count()) synth.width = dc1 ? 75 : 100;
        if (!active_opt->count()) synth.m_active = dc1 ? 5 : 9;
      }
      return run_synth(synth);
    }
    if (active == seg_cmd) return run_segment(seg);
    if (active == unmix_cmd) return run_unmix(unmix);
    if (active == eval_cmd) return run_eval(ev);
    if (active == sweep_cmd) return run_sweep(sweep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
