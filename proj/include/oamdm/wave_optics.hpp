#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "oamdm/oam_state.hpp"

namespace oamdm {

/// Square sampling grid shared by all fields in a simulation.
struct GridSpec {
  int n = 1024;                 // samples per axis
  double pitch = 10e-6;         // meters per pixel
  double wavelength = 633e-9;   // meters

  void validate() const;
  /// Centered coordinate of sample index i (zero at i = n/2).
  double coord(int i) const { return (i - n / 2) * pitch; }
  double extent() const { return n * pitch; }
};

/// Monochromatic scalar field on a square grid, row-major, y-major
/// (grid[iy * n + ix]); x horizontal, y vertical.
struct ScalarField {
  GridSpec grid;
  std::vector<Complex> amps;

  double power() const;  // sum |E|^2 * pitch^2
  ScalarField& normalize_power();
};

/// Log-polar sorter parameters. The unwrapper maps azimuth to the
/// vertical axis, v = a*theta, and log-radius to the horizontal axis,
/// u = -a*ln(r/b); f is the focal length integrated into both elements.
struct SorterGeometry {
  double a = 0.0;        // azimuth-to-position scale, meters
  double b = 2.5e-3;     // radial reference (ring radius), meters
  double f = 0.1;        // integrated lens focal length, meters
  double n_index = 1.49; // element refractive index (phase/thickness scale)

  void validate() const;
  /// Default scale: the unwrapped strip (length 2*pi*a) spans half the grid.
  static SorterGeometry defaults(const GridSpec& grid);
  /// Strip period in v (= 2*pi*a), also the fan-out copy displacement.
  double strip_width() const;
};

/// Annular ("ring") beam envelope used as the OAM carrier.
struct RingSpec {
  double radius = 2.5e-3;  // meters
  double sigma = 0.5e-3;   // radial 1/e half-width, meters
};

/// Periodic phase grating splitting one order into `copies` adjacent
/// orders. phase_coeffs parameterize phi(x) = sum_k [c_k cos(kx) +
/// s_k sin(kx)] over one period, stored [c1, s1, c2, s2, ...].
struct FanoutSpec {
  int copies = 3;
  double period = 0.0;  // meters (set by the detection chain)
  std::vector<double> phase_coeffs;
  double efficiency = 0.0;   // power in the central `copies` orders
  double uniformity = 0.0;   // (max-min)/mean over those orders
  bool converged = true;     // false when the optimizer stagnated short of 0.9

  double phase_at(double x_over_period) const;  // argument in cycles
};

/// Ring-Gaussian envelope with exp(i*ell*phi) azimuthal phase, unit power.
/// Throws SamplingError when the winding is not resolved by >= 8 pixels
/// per 2*pi cycle at the ring radius.
ScalarField make_oam_field(int ell, const RingSpec& ring, const GridSpec& grid);

/// Phase masks (radians) of the two sorter elements on the grid.
/// r1 lives in the input (x, y) plane, r2 in the unwrapped (u, v) plane
/// with u horizontal and v vertical.
std::vector<double> element_phase_r1(const SorterGeometry& geom,
                                     const GridSpec& grid);
std::vector<double> element_phase_r2(const SorterGeometry& geom,
                                     const GridSpec& grid);

void apply_phase(ScalarField& field, const std::vector<double>& phase);

/// Band-limited angular-spectrum propagation over `distance` with 2x
/// zero padding. Throws SamplingError past the padded Fresnel bound.
ScalarField propagate(const ScalarField& field, double distance);

/// Ideal f-f Fourier-lens step: output pitch becomes
/// wavelength*f / (n*pitch); power conserved; applying it twice inverts
/// the image.
ScalarField lens_ft(const ScalarField& field, double f);

/// Unwrapped strip after R1 -> free-space f -> R2 for one input mode.
ScalarField sorter_strip(int ell, const SorterGeometry& geom,
                         const RingSpec& ring, const GridSpec& grid);

/// Optimize a continuous periodic phase profile for an odd `copies`-way
/// splitter. copies = 1 returns a flat phase with efficiency 1.
FanoutSpec design_fanout(int copies, double uniformity_tol = 0.02,
                         int n_coeffs = 6);

/// Diffraction-order amplitudes c_m, m in [-max_order, max_order], of
/// exp(i*phi(x)) computed by direct quadrature (2*max_order+1 entries).
std::vector<Complex> fanout_order_amplitudes(const FanoutSpec& spec,
                                             int max_order,
                                             int n_samples = 8192);

/// Detection-plane diagnostics for one sorted strip. `fv` is the centered
/// spatial frequency along v; `power` integrates to the strip power; with
/// a fan-out, `v_power` shows the tripled strip and `copy_gradient` holds
/// the mean per-copy phase step along v (order -1, 0, +1).
struct SortedProfile {
  std::vector<double> fv;
  std::vector<double> power;
  std::vector<double> v_power;
  std::array<Complex, 3> copy_gradient{};  // sum E[i+1]*conj(E[i]) per copy
};

SortedProfile sorted_profile(const ScalarField& strip,
                             const SorterGeometry& geom,
                             const std::optional<FanoutSpec>& fanout,
                             int pad = 16);

/// Crosstalk between sorted OAM channels: entry (ell, ell') is the
/// fraction of mode-ell power inside the detection window of ell'.
struct CrosstalkMatrix {
  int l_max = 0;
  std::vector<double> entries;  // (2*l_max+1)^2, row-major in ell

  int dim() const { return 2 * l_max + 1; }
  double at(int ell, int ell_prime) const;
  double mean_nearest_neighbor() const;
  double mean_diagonal() const;
};

/// Simulate the full chain for every ell in [-l_max, l_max]. The window
/// width defaults to the mode spacing 1/strip_width; a width larger than
/// the spacing (overlapping windows) is a domain error.
CrosstalkMatrix crosstalk_matrix(const SorterGeometry& geom,
                                 const RingSpec& ring, const GridSpec& grid,
                                 const std::optional<FanoutSpec>& fanout,
                                 int l_max, double window_width = 0.0);

/// Same, from pre-computed strips (strips[i] carries ell = i - l_max);
/// lets callers evaluate fan-out on/off without re-running the sorter.
CrosstalkMatrix crosstalk_from_strips(const std::vector<ScalarField>& strips,
                                      const SorterGeometry& geom,
                                      const std::optional<FanoutSpec>& fanout,
                                      int l_max, double window_width = 0.0);

/// Centroid (first moment) of a sorted-profile power distribution.
double profile_centroid(const SortedProfile& profile);

/// Crosstalk CSV: header "ell\\<ell'>,...", one row per input mode.
void write_crosstalk_csv(std::ostream& os, const CrosstalkMatrix& m);
void write_crosstalk_csv_file(const std::string& path, const CrosstalkMatrix& m);

/// Raw little-endian float32 dump of a phase mask plus a JSON sidecar
/// {pitch_m, wavelength_m, description} at path + ".json".
void write_phase_mask(const std::string& path, const std::vector<double>& phase,
                      const GridSpec& grid, const std::string& description);

}  // namespace oamdm
