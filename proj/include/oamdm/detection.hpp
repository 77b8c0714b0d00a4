#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "oamdm/weak_measure.hpp"

namespace oamdm {

/// Photon-counting noise model. Identical spec (including seed) produces
/// bit-identical count records.
struct NoiseSpec {
  uint64_t photons_per_setting = 100000;  // ensemble size per ell per basis
  double dark_rate_hz = 100.0;            // per detector
  double background_rate_hz = 0.0;        // per detector
  double integration_s = 1.0;
  uint64_t seed = 0;
  uint64_t run_index = 0;  // substream label for multi-run experiments

  void validate() const;
  double nuisance_mean() const {
    return (dark_rate_hz + background_rate_hz) * integration_s;
  }
};

/// Polarization analysis bases read out on disjoint photon ensembles.
enum class AnalysisBasis : int {
  kLinearDiagonal = 0,  // eigenbasis of sigma_1
  kCircular = 1,        // eigenbasis of sigma_2
};

struct PortCounts {
  uint64_t n_plus = 0;
  uint64_t n_minus = 0;
};

/// Simulated detector counts per ell-setting and analysis basis.
struct CountRecord {
  int l_max = 0;
  std::vector<std::array<PortCounts, 2>> counts;  // [ell+l_max][basis]
  std::vector<double> postselection_prob;

  int dim() const { return 2 * l_max + 1; }
};

struct PauliEstimate {
  double sigma1 = 0.0, sigma1_err = 0.0;
  double sigma2 = 0.0, sigma2_err = 0.0;
};

/// Port probabilities of a pointer state in an analysis basis.
std::pair<double, double> port_probabilities(const std::array<Complex, 2>& pointer,
                                             AnalysisBasis basis);

/// Draw Poisson counts for every (ell, basis, port) with signal mean
/// N * postselection_prob * p_port plus an independent nuisance mean
/// (dark + background) * integration per detector.
CountRecord simulate_counts(const std::vector<PointerState>& pointer_states,
                            int l_max, const NoiseSpec& noise);

/// Invert counts into Pauli expectations with analytic nuisance subtraction
/// and Poisson error propagation. Throws InsufficientSignalError when the
/// bias-subtracted denominator is non-positive.
std::vector<PauliEstimate> estimate_pauli(const CountRecord& record,
                                          const NoiseSpec& noise);

/// Assemble a weak-value scan from Pauli estimates:
/// w = (sigma1 - i*sigma2)/sin_alpha, errors scaled the same way.
WeakValueScan scan_from_estimates(const std::vector<PauliEstimate>& estimates,
                                  int l_max, double sin_alpha);

/// Per-ell mean of Re/Im over scans; uncertainties become standard errors
/// of the mean. A single scan is returned unchanged.
WeakValueScan average_runs(const std::vector<WeakValueScan>& scans);

/// Count record CSV, columns: ell,basis,n_plus,n_minus,postsel_prob.
void write_counts_csv(std::ostream& os, const CountRecord& record);
void write_counts_csv_file(const std::string& path, const CountRecord& record);

}  // namespace oamdm
