#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace oamdm {

using Complex = std::complex<double>;

/// Pure state in the discrete OAM basis, amplitudes indexed by
/// ell = -l_max .. +l_max (dimension d = 2*l_max + 1, always odd).
class OamState {
 public:
  OamState(std::vector<Complex> amplitudes, int l_max);

  /// Basis state |ell>.
  static OamState basis(int ell, int l_max);

  int l_max() const { return l_max_; }
  int dim() const { return 2 * l_max_ + 1; }

  Complex amplitude(int ell) const { return amps_[index_of(ell)]; }
  const std::vector<Complex>& amplitudes() const { return amps_; }

  /// Sum of |a_ell|^2.
  double norm_squared() const;

  /// Unit-norm copy. Throws std::domain_error on the zero vector.
  OamState normalized() const;

  /// Copy with the global-phase gauge fixed: phase(a_0) = 0 when a_0 != 0,
  /// else the largest-magnitude component is made real positive.
  OamState gauge_fixed() const;

  int index_of(int ell) const;
  int ell_of(int index) const { return index - l_max_; }

 private:
  std::vector<Complex> amps_;
  int l_max_;
};

/// d-point discrete angular-position basis, theta_n = 2*pi*n/d.
struct AngularBasisSpec {
  int d;
  double theta(int n) const;
};

/// Sinc-distributed state from an angular aperture of width delta_theta.
/// a_ell ~ sinc(delta_theta*ell/2), truncated to [-l_max, l_max], normalized.
OamState aperture_state(double delta_theta, int l_max);

/// a'_ell = a_ell * exp(i*ell*theta0).
OamState rotate_state(const OamState& state, double theta0);

/// <theta_n|Psi> = (1/sqrt(d)) * sum_ell exp(-i*ell*theta_n) * a_ell.
Complex angle_overlap(const AngularBasisSpec& spec, int n, const OamState& state);

/// |<a|b>|^2.
double fidelity(const OamState& a, const OamState& b);

/// CSV round-trip, columns: ell,re,im (header mandatory, LF endings).
void write_state_csv(std::ostream& os, const OamState& state);
OamState read_state_csv(std::istream& is);
void write_state_csv_file(const std::string& path, const OamState& state);
OamState read_state_csv_file(const std::string& path);

}  // namespace oamdm
