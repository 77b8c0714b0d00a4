#pragma once

#include <array>
#include <vector>

#include "oamdm/oam_state.hpp"

namespace oamdm {

/// Composite OAM x polarization amplitudes; polarization index 0 = H, 1 = V.
struct JointState {
  std::vector<std::array<Complex, 2>> amps;  // indexed by ell + l_max
  int l_max;

  static JointState prepare(const OamState& system);  // pointer starts in |V>
  double norm_squared() const;
};

/// Coupling between one OAM projector and the polarization pointer.
struct CouplingSpec {
  double alpha;    // pointer rotation strength, [0, pi/2]
  int target_ell;  // mode being weakly projected

  void validate(int l_max) const;
};

/// Two-component pointer state after post-selection.
struct PointerState {
  std::array<Complex, 2> amps;  // (H, V), renormalized
  double postselection_prob;    // |<theta_n| U |Psi,V>|^2 before renormalization
};

struct PauliExpectations {
  double sigma1;
  double sigma2;
  double sigma3;
};

/// Per-ell complex weak values with the Pauli readouts they came from.
struct WeakValueScan {
  int l_max = 0;
  std::vector<Complex> values;                      // <pi_ell>_w
  std::vector<double> sigma1;                       // <sigma_1> readout
  std::vector<double> sigma2;                       // <sigma_2> readout
  std::vector<std::pair<double, double>> uncertainties;  // (err_re, err_im)
  double sin_alpha = 0.0;

  int dim() const { return 2 * l_max + 1; }
  Complex value(int ell) const { return values[ell + l_max]; }
};

/// Exact coupling unitary U = exp(i*sin(alpha) * pi_ell (x) sigma_2 / 2),
/// evaluated in closed form via the projector identity
/// U = I + pi_ell (x) (exp(i*sin(alpha)*sigma_2/2) - I).
class CouplingUnitary {
 public:
  CouplingUnitary(const CouplingSpec& spec, int l_max);

  void apply(JointState& state) const;

  /// 2x2 pointer rotation block exp(i*sin(alpha)*sigma_2/2).
  const std::array<std::array<Complex, 2>, 2>& pointer_block() const {
    return block_;
  }

  /// Dense (2d x 2d) matrix, row-major over (ell, pol) pairs. For tests.
  std::vector<Complex> dense() const;

  int dim() const { return 2 * (2 * l_max_ + 1); }

 private:
  int l_max_;
  int target_ell_;
  std::array<std::array<Complex, 2>, 2> block_;
};

/// Couple, post-select <theta_n|, return the conditional pointer state.
/// Exact evolution; throws DegeneratePostselectionError when <theta_n|Psi>
/// vanishes.
PointerState weak_then_strong(const OamState& state, const CouplingSpec& spec,
                              int theta_index);

/// Pauli expectation values of a (renormalized) pointer state.
PauliExpectations pauli_expectations(const std::array<Complex, 2>& pointer);

/// Scan the weak projection through every ell in [-l_max, l_max] and invert
/// the Pauli readout: w = (sigma1 - i*sigma2) / sin(alpha).
WeakValueScan direct_measure(const OamState& state, double alpha,
                             int theta_index);

/// Scan CSV, columns: ell,re_w,im_w,sigma1,sigma2,err_re,err_im.
void write_scan_csv(std::ostream& os, const WeakValueScan& scan);
WeakValueScan read_scan_csv(std::istream& is);
void write_scan_csv_file(const std::string& path, const WeakValueScan& scan);
WeakValueScan read_scan_csv_file(const std::string& path);

}  // namespace oamdm
