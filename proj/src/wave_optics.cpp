#include "oamdm/wave_optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>
#include <json.hpp>

#include "oamdm/errors.hpp"

namespace oamdm {

namespace {

constexpr double kPi = std::numbers::pi;

// fftfreq ordering: index k maps to cycle frequency k/(m*pitch) for
// k < m/2 and (k - m)/(m*pitch) above.
double fft_freq(int k, int m, double pitch) {
  int kk = k < m / 2 ? k : k - m;
  return kk / (m * pitch);
}

}  // namespace

void GridSpec::validate() const {
  if (n < 4 || n % 2 != 0)
    throw std::domain_error("grid size must be even and >= 4");
  if (!(pitch > 0.0)) throw std::domain_error("pitch must be > 0");
  if (!(wavelength > 0.0)) throw std::domain_error("wavelength must be > 0");
}

double ScalarField::power() const {
  double s = 0.0;
  for (const auto& a : amps) s += std::norm(a);
  return s * grid.pitch * grid.pitch;
}

ScalarField& ScalarField::normalize_power() {
  double p = power();
  if (!(p > 0.0)) throw std::domain_error("cannot normalize a zero field");
  double s = 1.0 / std::sqrt(p);
  for (auto& a : amps) a *= s;
  return *this;
}

void SorterGeometry::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(f > 0.0))
    throw std::domain_error("sorter a, b, f must be > 0");
  if (!(n_index > 1.0 && n_index < 2.0))
    throw std::domain_error("refractive index must lie in (1, 2)");
}

SorterGeometry SorterGeometry::defaults(const GridSpec& grid) {
  grid.validate();
  SorterGeometry g;
  g.a = (grid.n / 2) * grid.pitch / (2.0 * kPi);
  return g;
}

double SorterGeometry::strip_width() const { return 2.0 * kPi * a; }

ScalarField make_oam_field(int ell, const RingSpec& ring, const GridSpec& grid) {
  grid.validate();
  if (!(ring.radius > 0.0) || !(ring.sigma > 0.0))
    throw std::domain_error("ring radius and sigma must be > 0");
  double px_per_cycle =
      std::abs(ell) > 0 ? 2.0 * kPi * ring.radius / (grid.pitch * std::abs(ell))
                        : 1e30;
  if (px_per_cycle < 8.0)
    throw SamplingError("azimuthal winding under-resolved: " +
                        std::to_string(px_per_cycle) +
                        " px per cycle at the ring radius (need >= 8)");

  ScalarField field{grid, std::vector<Complex>(static_cast<size_t>(grid.n) * grid.n)};
  for (int iy = 0; iy < grid.n; ++iy) {
    double y = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      double x = grid.coord(ix);
      double r = std::hypot(x, y);
      double t = (r - ring.radius) / ring.sigma;
      double env = std::exp(-t * t);
      double phi = std::atan2(y, x);
      field.amps[static_cast<size_t>(iy) * grid.n + ix] =
          env * std::exp(Complex(0.0, ell * phi));
    }
  }
  return field.normalize_power();
}

std::vector<double> element_phase_r1(const SorterGeometry& geom,
                                     const GridSpec& grid) {
  geom.validate();
  grid.validate();
  const double lf = grid.wavelength * geom.f;
  std::vector<double> phase(static_cast<size_t>(grid.n) * grid.n);
  for (int iy = 0; iy < grid.n; ++iy) {
    double y = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      double x = grid.coord(ix);
      double r = std::hypot(x, y);
      double phi = std::atan2(y, x);
      // clamp the r = 0 singular pixel; the ring envelope vanishes there
      double t = y * phi - x * std::log(std::max(r, 1e-12) / geom.b) + x;
      phase[static_cast<size_t>(iy) * grid.n + ix] =
          (2.0 * kPi * geom.a / lf) * t - kPi * r * r / lf;
    }
  }
  return phase;
}

std::vector<double> element_phase_r2(const SorterGeometry& geom,
                                     const GridSpec& grid) {
  geom.validate();
  grid.validate();
  const double lf = grid.wavelength * geom.f;
  std::vector<double> phase(static_cast<size_t>(grid.n) * grid.n);
  for (int iy = 0; iy < grid.n; ++iy) {
    double v = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      double u = grid.coord(ix);
      phase[static_cast<size_t>(iy) * grid.n + ix] =
          -(2.0 * kPi * geom.a * geom.b / lf) * std::exp(-u / geom.a) *
              std::cos(v / geom.a) -
          kPi * (u * u + v * v) / lf;
    }
  }
  return phase;
}

void apply_phase(ScalarField& field, const std::vector<double>& phase) {
  if (phase.size() != field.amps.size())
    throw std::domain_error("phase mask does not match the field grid");
  for (size_t i = 0; i < phase.size(); ++i)
    field.amps[i] *= std::exp(Complex(0.0, phase[i]));
}

ScalarField propagate(const ScalarField& field, double distance) {
  field.grid.validate();
  if (distance == 0.0) return field;
  const int n = field.grid.n;
  const int m = 2 * n;  // zero-padded working grid
  const double pitch = field.grid.pitch;
  const double lam = field.grid.wavelength;
  // Fresnel sampling bound on the padded grid
  double z_max = m * pitch * pitch / lam;
  if (std::abs(distance) > z_max)
    throw SamplingError("propagation distance exceeds the sampling bound " +
                        std::to_string(z_max) + " m");

  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(m) * m);
  std::memset(buf, 0, sizeof(fftw_complex) * m * m);
  const int s = (m - n) / 2;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Complex& a = field.amps[static_cast<size_t>(iy) * n + ix];
      fftw_complex& c = buf[static_cast<size_t>(iy + s) * m + (ix + s)];
      c[0] = a.real();
      c[1] = a.imag();
    }

  fftw_plan fwd = fftw_plan_dft_2d(m, m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_2d(m, m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(fwd);

  const double inv_lam2 = 1.0 / (lam * lam);
  const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
  for (int ky = 0; ky < m; ++ky) {
    double fy = fft_freq(ky, m, pitch);
    for (int kx = 0; kx < m; ++kx) {
      double fx = fft_freq(kx, m, pitch);
      double arg = inv_lam2 - fx * fx - fy * fy;
      fftw_complex& c = buf[static_cast<size_t>(ky) * m + kx];
      if (arg <= 0.0) {
        c[0] = 0.0;  // evanescent cutoff
        c[1] = 0.0;
        continue;
      }
      double kz = 2.0 * kPi * std::sqrt(arg) * distance;
      Complex h = std::exp(Complex(0.0, kz)) * inv_m2;
      Complex v = Complex(c[0], c[1]) * h;
      c[0] = v.real();
      c[1] = v.imag();
    }
  }
  fftw_execute(bwd);

  ScalarField out{field.grid, std::vector<Complex>(field.amps.size())};
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const fftw_complex& c = buf[static_cast<size_t>(iy + s) * m + (ix + s)];
      out.amps[static_cast<size_t>(iy) * n + ix] = Complex(c[0], c[1]);
    }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(buf);
  return out;
}

ScalarField lens_ft(const ScalarField& field, double f) {
  field.grid.validate();
  if (!(f > 0.0)) throw std::domain_error("focal length must be > 0");
  const int n = field.grid.n;
  const double pitch = field.grid.pitch;
  const double lam = field.grid.wavelength;

  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n) * n);
  // ifftshift so the center pixel sits at index 0 (even n: shift by n/2)
  const int h = n / 2;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Complex& a = field.amps[static_cast<size_t>(iy) * n + ix];
      int jy = (iy + h) % n, jx = (ix + h) % n;
      fftw_complex& c = buf[static_cast<size_t>(jy) * n + jx];
      c[0] = a.real();
      c[1] = a.imag();
    }
  fftw_plan p = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);

  GridSpec out_grid = field.grid;
  out_grid.pitch = lam * f / (n * pitch);
  // scale chosen so power is conserved in the new pitch
  const double scale = pitch * pitch / (lam * f);
  ScalarField out{out_grid, std::vector<Complex>(field.amps.size())};
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      int jy = (iy + h) % n, jx = (ix + h) % n;  // fftshift back to centered
      const fftw_complex& c = buf[static_cast<size_t>(jy) * n + jx];
      out.amps[static_cast<size_t>(iy) * n + ix] =
          Complex(c[0], c[1]) * scale;
    }
  fftw_free(buf);
  return out;
}

ScalarField sorter_strip(int ell, const SorterGeometry& geom,
                         const RingSpec& ring, const GridSpec& grid) {
  ScalarField field = make_oam_field(ell, ring, grid);
  apply_phase(field, element_phase_r1(geom, grid));
  field = propagate(field, geom.f);
  apply_phase(field, element_phase_r2(geom, grid));
  return field;
}

double FanoutSpec::phase_at(double x_over_period) const {
  double x = 2.0 * kPi * x_over_period;
  double phi = 0.0;
  for (size_t k = 0; k + 1 < phase_coeffs.size() + 1; k += 2) {
    double kk = static_cast<double>(k / 2 + 1);
    phi += phase_coeffs[k] * std::cos(kk * x);
    if (k + 1 < phase_coeffs.size())
      phi += phase_coeffs[k + 1] * std::sin(kk * x);
  }
  return phi;
}

std::vector<Complex> fanout_order_amplitudes(const FanoutSpec& spec,
                                             int max_order, int n_samples) {
  std::vector<Complex> out(2 * max_order + 1, Complex(0.0, 0.0));
  for (int j = 0; j < n_samples; ++j) {
    double t = (j + 0.5) / n_samples;  // position in cycles
    Complex g = std::exp(Complex(0.0, spec.phase_at(t)));
    for (int m = -max_order; m <= max_order; ++m)
      out[m + max_order] += g * std::exp(Complex(0.0, -2.0 * kPi * m * t));
  }
  for (auto& c : out) c /= static_cast<double>(n_samples);
  return out;
}

namespace {

struct FanoutScore {
  double efficiency;
  double uniformity;
};

FanoutScore score_fanout(const FanoutSpec& spec, int n_samples = 512) {
  const int half = spec.copies / 2;
  std::vector<Complex> c = fanout_order_amplitudes(spec, half, n_samples);
  double lo = 1e30, hi = 0.0, sum = 0.0;
  for (const auto& amp : c) {
    double p = std::norm(amp);
    sum += p;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  double mean = sum / spec.copies;
  return {sum, mean > 0.0 ? (hi - lo) / mean : 1e30};
}

// Derivative-free Nelder-Mead on the penalized splitter objective.
std::vector<double> nelder_mead(const std::vector<double>& start,
                                double (*obj)(const std::vector<double>&, int,
                                              double),
                                int copies, double tol, int max_iter) {
  const int d = static_cast<int>(start.size());
  std::vector<std::vector<double>> simplex(d + 1, start);
  std::vector<double> fv(d + 1);
  for (int i = 0; i < d; ++i) simplex[i + 1][i] += 0.25;
  for (int i = 0; i <= d; ++i) fv[i] = obj(simplex[i], copies, tol);

  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> idx(d + 1);
    for (int i = 0; i <= d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a2, int b2) { return fv[a2] < fv[b2]; });
    if (fv[idx[d]] - fv[idx[0]] < 1e-12) break;

    std::vector<double> centroid(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) centroid[k] += simplex[idx[i]][k] / d;

    auto blend = [&](double coef) {
      std::vector<double> p(d);
      for (int k = 0; k < d; ++k)
        p[k] = centroid[k] + coef * (centroid[k] - simplex[idx[d]][k]);
      return p;
    };
    std::vector<double> refl = blend(1.0);
    double f_refl = obj(refl, copies, tol);
    if (f_refl < fv[idx[0]]) {
      std::vector<double> exp_p = blend(2.0);
      double f_exp = obj(exp_p, copies, tol);
      if (f_exp < f_refl) {
        simplex[idx[d]] = exp_p;
        fv[idx[d]] = f_exp;
      } else {
        simplex[idx[d]] = refl;
        fv[idx[d]] = f_refl;
      }
    } else if (f_refl < fv[idx[d - 1]]) {
      simplex[idx[d]] = refl;
      fv[idx[d]] = f_refl;
    } else {
      std::vector<double> con = blend(-0.5);
      double f_con = obj(con, copies, tol);
      if (f_con < fv[idx[d]]) {
        simplex[idx[d]] = con;
        fv[idx[d]] = f_con;
      } else {
        for (int i = 1; i <= d; ++i) {
          for (int k = 0; k < d; ++k)
            simplex[idx[i]][k] =
                0.5 * (simplex[idx[i]][k] + simplex[idx[0]][k]);
          fv[idx[i]] = obj(simplex[idx[i]], copies, tol);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (fv[i] < fv[best]) best = i;
  return simplex[best];
}

double fanout_objective(const std::vector<double>& coeffs, int copies,
                        double tol) {
  FanoutSpec spec;
  spec.copies = copies;
  spec.phase_coeffs = coeffs;
  FanoutScore s = score_fanout(spec);
  double pen = std::max(0.0, s.uniformity - tol);
  return -s.efficiency + 25.0 * pen * pen + pen;
}

}  // namespace

FanoutSpec design_fanout(int copies, double uniformity_tol, int n_coeffs) {
  if (copies < 1 || copies % 2 == 0)
    throw std::domain_error("fan-out copies must be a positive odd integer");
  FanoutSpec spec;
  spec.copies = copies;
  if (copies == 1) {
    spec.efficiency = 1.0;
    spec.uniformity = 0.0;
    return spec;
  }
  if (n_coeffs < 2) throw std::domain_error("need at least 2 phase coefficients");

  const std::vector<std::vector<double>> starts = {
      std::vector<double>(n_coeffs, 0.1),
      [&] {
        std::vector<double> s(n_coeffs, 0.0);
        s[0] = 1.2;
        return s;
      }(),
      [&] {
        std::vector<double> s(n_coeffs, 0.0);
        s[0] = 1.0;
        if (n_coeffs >= 5) s[4] = -0.2;
        return s;
      }(),
      std::vector<double>(n_coeffs, -0.3),
  };

  std::vector<double> best;
  double best_f = 1e30;
  for (const auto& s0 : starts) {
    std::vector<double> c =
        nelder_mead(s0, fanout_objective, copies, uniformity_tol, 4000);
    double f = fanout_objective(c, copies, uniformity_tol);
    if (f < best_f) {
      best_f = f;
      best = c;
    }
  }
  spec.phase_coeffs = best;
  FanoutScore s = score_fanout(spec, 8192);
  spec.efficiency = s.efficiency;
  spec.uniformity = s.uniformity;
  spec.converged = spec.efficiency >= 0.9 && s.uniformity <= uniformity_tol;
  return spec;
}

SortedProfile sorted_profile(const ScalarField& strip,
                             const SorterGeometry& geom,
                             const std::optional<FanoutSpec>& fanout,
                             int pad) {
  strip.grid.validate();
  geom.validate();
  if (pad < 2) throw std::domain_error("pad factor must be >= 2");
  const int n = strip.grid.n;
  const int m = n * pad;
  const int s = (m - n) / 2;  // strip center lands at index m/2
  const double pitch = strip.grid.pitch;
  const double w = geom.strip_width();

  SortedProfile prof;
  prof.fv.resize(m);
  prof.power.assign(m, 0.0);
  prof.v_power.assign(m, 0.0);
  for (int j = 0; j < m; ++j) prof.fv[j] = (j - m / 2) / (m * pitch);

  // grating phase (frequency domain, period 1/w) and per-copy corrector
  std::vector<double> gphase;
  std::vector<Complex> corrector;
  std::array<Complex, 3> order_phase{Complex(1, 0), Complex(1, 0), Complex(1, 0)};
  if (fanout) {
    if (fanout->copies != 3)
      throw std::domain_error("detection chain supports a 3-copy fan-out");
    std::vector<Complex> orders = fanout_order_amplitudes(*fanout, 1, 4096);
    for (int mm = -1; mm <= 1; ++mm) {
      Complex c = orders[mm + 1];
      order_phase[mm + 1] =
          std::abs(c) > 0.0 ? std::exp(Complex(0.0, -std::arg(c)))
                            : Complex(1.0, 0.0);
    }
    gphase.resize(m);
    corrector.assign(m, Complex(1.0, 0.0));
    for (int k = 0; k < m; ++k) {
      double fv = fft_freq(k, m, pitch);
      double t = fv * w - std::floor(fv * w);
      gphase[k] = fanout->phase_at(t);
    }
    for (int j = 0; j < m; ++j) {
      double vc = (j - m / 2) * pitch;  // centered v coordinate
      for (int mm = -1; mm <= 1; ++mm)
        if (std::abs(vc - mm * w) <= w / 2) corrector[j] = order_phase[mm + 1];
    }
  }

  fftw_complex* buf = fftw_alloc_complex(m);
  fftw_plan fwd = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  std::vector<Complex> col(m);

  const double inv_m = 1.0 / m;
  for (int ix = 0; ix < n; ++ix) {
    std::fill(col.begin(), col.end(), Complex(0.0, 0.0));
    for (int iy = 0; iy < n; ++iy)
      col[s + iy] = strip.amps[static_cast<size_t>(iy) * n + ix];

    if (!fanout) {
      for (int j = 0; j < m; ++j) {
        prof.v_power[j] += std::norm(col[j]);
        if (j + 1 < m) prof.copy_gradient[1] += col[j + 1] * std::conj(col[j]);
      }
      for (int j = 0; j < m; ++j) {
        buf[j][0] = col[j].real();
        buf[j][1] = col[j].imag();
      }
      fftw_execute(fwd);
      for (int k = 0; k < m; ++k)
        prof.power[k] += (buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1]) * inv_m;
      continue;
    }

    for (int j = 0; j < m; ++j) {
      buf[j][0] = col[j].real();
      buf[j][1] = col[j].imag();
    }
    fftw_execute(fwd);
    for (int k = 0; k < m; ++k) {
      Complex v = Complex(buf[k][0], buf[k][1]) *
                  std::exp(Complex(0.0, gphase[k])) * inv_m;
      buf[k][0] = v.real();
      buf[k][1] = v.imag();
    }
    fftw_execute(bwd);  // back to the v domain: three strip copies
    for (int j = 0; j < m; ++j) {
      Complex v = Complex(buf[j][0], buf[j][1]) * corrector[j];
      col[j] = v;
      buf[j][0] = v.real();
      buf[j][1] = v.imag();
      prof.v_power[j] += std::norm(v);
    }
    for (int mm = -1; mm <= 1; ++mm) {
      double lo = mm * w - w / 2, hi = mm * w + w / 2;
      for (int j = 0; j + 1 < m; ++j) {
        double vc = (j - m / 2) * pitch;
        if (vc >= lo && vc + pitch <= hi)
          prof.copy_gradient[mm + 1] += col[j + 1] * std::conj(col[j]);
      }
    }
    fftw_execute(fwd);
    for (int k = 0; k < m; ++k)
      prof.power[k] += (buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1]) * inv_m;
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(buf);

  // rotate spectral power into centered (fftshift) order
  std::vector<double> shifted(m);
  for (int j = 0; j < m; ++j) shifted[j] = prof.power[(j + m / 2) % m];
  prof.power = std::move(shifted);
  return prof;
}

double CrosstalkMatrix::at(int ell, int ell_prime) const {
  int i = ell + l_max, j = ell_prime + l_max;
  if (i < 0 || i >= dim() || j < 0 || j >= dim())
    throw std::out_of_range("crosstalk index out of range");
  return entries[static_cast<size_t>(i) * dim() + j];
}

double CrosstalkMatrix::mean_nearest_neighbor() const {
  double sum = 0.0;
  int count = 0;
  for (int ell = -l_max + 1; ell <= l_max - 1; ++ell) {
    sum += at(ell, ell - 1) + at(ell, ell + 1);
    ++count;
  }
  if (count == 0) throw std::domain_error("matrix too small for neighbors");
  return sum / count;
}

double CrosstalkMatrix::mean_diagonal() const {
  double sum = 0.0;
  for (int ell = -l_max; ell <= l_max; ++ell) sum += at(ell, ell);
  return sum / dim();
}

CrosstalkMatrix crosstalk_from_strips(const std::vector<ScalarField>& strips,
                                      const SorterGeometry& geom,
                                      const std::optional<FanoutSpec>& fanout,
                                      int l_max, double window_width) {
  if (strips.size() != static_cast<size_t>(2 * l_max + 1))
    throw std::domain_error("strip count does not match 2*l_max+1");
  const double spacing = 1.0 / geom.strip_width();
  if (window_width <= 0.0) window_width = spacing;
  if (window_width > spacing * (1.0 + 1e-12))
    throw std::domain_error("detection windows overlap: width exceeds spacing");

  CrosstalkMatrix mat;
  mat.l_max = l_max;
  mat.entries.assign(static_cast<size_t>(mat.dim()) * mat.dim(), 0.0);
  for (int ell = -l_max; ell <= l_max; ++ell) {
    const ScalarField& strip = strips[ell + l_max];
    SortedProfile prof = sorted_profile(strip, geom, fanout);
    // input modes carry unit power; profile power is in sum-|E|^2 units
    const double pitch2 = strip.grid.pitch * strip.grid.pitch;
    for (int lp = -l_max; lp <= l_max; ++lp) {
      double c = lp * spacing;
      double sum = 0.0;
      for (size_t j = 0; j < prof.fv.size(); ++j)
        if (prof.fv[j] >= c - window_width / 2 &&
            prof.fv[j] < c + window_width / 2)
          sum += prof.power[j];
      mat.entries[static_cast<size_t>(ell + l_max) * mat.dim() +
                  (lp + l_max)] = sum * pitch2;
    }
  }
  return mat;
}

CrosstalkMatrix crosstalk_matrix(const SorterGeometry& geom,
                                 const RingSpec& ring, const GridSpec& grid,
                                 const std::optional<FanoutSpec>& fanout,
                                 int l_max, double window_width) {
  std::vector<ScalarField> strips;
  strips.reserve(2 * l_max + 1);
  for (int ell = -l_max; ell <= l_max; ++ell)
    strips.push_back(sorter_strip(ell, geom, ring, grid));
  return crosstalk_from_strips(strips, geom, fanout, l_max, window_width);
}

double profile_centroid(const SortedProfile& profile) {
  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < profile.fv.size(); ++j) {
    num += profile.fv[j] * profile.power[j];
    den += profile.power[j];
  }
  if (!(den > 0.0)) throw std::domain_error("empty profile");
  return num / den;
}

void write_crosstalk_csv(std::ostream& os, const CrosstalkMatrix& m) {
  os << "ell";
  for (int lp = -m.l_max; lp <= m.l_max; ++lp) os << "," << lp;
  os << "\n";
  char buf[32];
  for (int ell = -m.l_max; ell <= m.l_max; ++ell) {
    os << ell;
    for (int lp = -m.l_max; lp <= m.l_max; ++lp) {
      std::snprintf(buf, sizeof(buf), ",%.10g", m.at(ell, lp));
      os << buf;
    }
    os << "\n";
  }
}

void write_crosstalk_csv_file(const std::string& path,
                              const CrosstalkMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_crosstalk_csv(os, m);
}

void write_phase_mask(const std::string& path, const std::vector<double>& phase,
                      const GridSpec& grid, const std::string& description) {
  if (phase.size() != static_cast<size_t>(grid.n) * grid.n)
    throw std::domain_error("phase mask does not match the grid");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  std::vector<float> row(grid.n);
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix)
      row[ix] = static_cast<float>(phase[static_cast<size_t>(iy) * grid.n + ix]);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  nlohmann::json j;
  j["pitch_m"] = grid.pitch;
  j["wavelength_m"] = grid.wavelength;
  j["shape"] = {grid.n, grid.n};
  j["dtype"] = "float32-le";
  j["description"] = description;
  std::ofstream js(path + ".json", std::ios::binary);
  if (!js) throw std::runtime_error("cannot open for writing: " + path + ".json");
  js << j.dump(2) << "\n";
}

}  // namespace oamdm
