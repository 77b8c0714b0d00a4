#pragma once

#include <map>
#include <optional>
#include <string>

#include "oamdm/analysis.hpp"
#include "oamdm/config.hpp"

namespace oamdm {

/// In-memory result of one full direct-measurement experiment:
/// the unrotated scan plus the two rotated ones, reconstructions,
/// pointwise phase differences and all fits.
struct MeasurementBundle {
  ExperimentConfig config;
  bool noiseless = false;

  OamState true_state{std::vector<Complex>{Complex(1.0, 0.0)}, 0};
  WeakValueScan scan_zero, scan_plus, scan_minus;  // theta0 = 0, +t, -t
  ReconstructedState recon_zero, recon_plus, recon_minus;
  std::vector<double> delta_phi_plus, delta_phi_minus;  // wrapped to (-pi, pi]
  std::vector<double> delta_phi_plus_err, delta_phi_minus_err;

  FitResult sinc_fit;
  FitResult quad_fit;
  FitResult slope_plus_fit, slope_minus_fit;
  std::set<int> pi_jumps;
  std::set<int> mask;
  double fidelity_with_truth = 0.0;
};

/// Run the full prepare -> couple -> detect -> analyze pipeline with
/// `runs` seeded repetitions (averaged) per rotation setting.
/// Deterministic given the config.
MeasurementBundle run_direct_measurement(const ExperimentConfig& config,
                                         bool noiseless);

/// Write the bundle (scan + reconstruction CSVs, fits.json, run.log,
/// resolved_config.ini, manifest.json) into `out_dir` (created if needed).
void write_bundle(const MeasurementBundle& bundle, const std::string& out_dir);

/// Re-load scans written by write_bundle and redo the analysis stage.
/// Throws MissingInputError when a scan CSV is absent.
MeasurementBundle reanalyze_bundle(const ExperimentConfig& config,
                                   const std::string& dir);

/// Long-format plot CSVs (columns x,y,yerr,series), one per figure panel:
/// fig2a (Re/Im weak values), fig2b (probability density), fig2c (phase),
/// fig3a/b/d/e (rotated density+phase), fig3c/f (phase differences).
/// Throws MissingInputError when the bundle directory is incomplete.
void emit_plot_data(const std::string& bundle_dir, const std::string& out_dir);

/// Sorter characterization summary.
struct SorterReport {
  CrosstalkMatrix without_fanout;
  CrosstalkMatrix with_fanout;
  FanoutSpec fanout;
  double mean_nn_off = 0.0;
  double mean_nn_on = 0.0;
  bool diagonal_dominant = false;
};

/// Simulate the sorter with and without the fan-out and write
/// crosstalk CSVs, phase masks and a summary JSON into `out_dir`.
SorterReport run_sorter_characterization(const ExperimentConfig& config,
                                         const std::string& out_dir);

}  // namespace oamdm
