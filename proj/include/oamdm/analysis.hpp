#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oamdm/weak_measure.hpp"

namespace oamdm {

/// State vector recovered from a weak-value scan, with densities, phases
/// and first-order propagated uncertainties.
struct ReconstructedState {
  OamState state{std::vector<Complex>{Complex(1.0, 0.0)}, 0};  // unit, gauged
  std::vector<double> prob_density;
  std::vector<double> phase;      // principal value in (-pi, pi]
  std::vector<double> prob_err;
  std::vector<double> phase_err;

  int l_max() const { return state.l_max(); }
  int dim() const { return state.dim(); }
};

struct FitParam {
  std::string name;
  double value = 0.0;
  double err = 0.0;
};

struct FitResult {
  std::string model;  // "sinc-squared" | "quadratic-phase" | "linear-phase"
  std::vector<FitParam> params;
  double chi2 = 0.0;
  int dof = 0;

  const FitParam& param(const std::string& name) const;
};

/// Divide by the norm, fix the global-phase gauge and propagate per-ell
/// uncertainties. Throws std::domain_error on an all-zero scan.
ReconstructedState renormalize_scan(const WeakValueScan& scan);

/// Weighted least squares of A*sinc^2(pi*ell/dl) over (A, dl).
/// Points are (ell, density, err); zero/absent errors fall back to an
/// unweighted fit with residual-scaled parameter errors.
FitResult fit_sinc_squared(const std::vector<int>& ells,
                           const std::vector<double>& density,
                           const std::vector<double>& err);

/// phi(ell) = a*ell^2 + b*ell + c on the pi-jump-corrected phase.
FitResult fit_phase_quadratic(const std::vector<int>& ells,
                              const std::vector<double>& phase,
                              const std::vector<double>& err,
                              const std::set<int>& mask);

/// Chi-square minimization of phi(ell) = m*ell + c.
FitResult fit_phase_linear_chi2(const std::vector<int>& ells,
                                const std::vector<double>& phase,
                                const std::vector<double>& err,
                                const std::set<int>& mask);

/// ell values where the phase steps by ~pi across a probability-density
/// local minimum.
std::set<int> detect_pi_jumps(const ReconstructedState& state,
                              double tol = 0.5);

/// Mask of ell values whose density is at least `frac` of the peak
/// (the default 1% rule keeps phase fits away from amplitude nulls).
std::set<int> amplitude_mask(const ReconstructedState& state,
                             double frac = 0.01);

/// Unwrap a masked phase sequence along ell, folding out pi-jumps that
/// coincide with amplitude sign changes.
std::vector<double> sign_corrected_phase(const std::vector<int>& ells,
                                         const std::vector<double>& phase,
                                         const std::set<int>& mask);

/// Reconstruction CSV, columns: ell,prob,prob_err,phase,phase_err.
void write_reconstruction_csv(std::ostream& os, const ReconstructedState& r);
void write_reconstruction_csv_file(const std::string& path,
                                   const ReconstructedState& r);

/// FitResult JSON: {model, params: {name: {value, err}}, chi2, dof}.
std::string fit_result_json(const FitResult& fit);

}  // namespace oamdm
