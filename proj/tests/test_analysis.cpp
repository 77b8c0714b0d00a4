#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oamdm/analysis.hpp"
#include "oamdm/errors.hpp"
#include "oamdm/rng.hpp"

using namespace oamdm;

namespace {

constexpr double kPi = std::numbers::pi;

WeakValueScan scan_from_state(const OamState& s) {
  WeakValueScan scan;
  scan.l_max = s.l_max();
  scan.values = s.amplitudes();
  scan.sigma1.assign(s.dim(), 0.0);
  scan.sigma2.assign(s.dim(), 0.0);
  scan.uncertainties.assign(s.dim(), {0.0, 0.0});
  scan.sin_alpha = std::sin(kPi / 9.0);
  return scan;
}

std::vector<int> ell_axis(int l_max) {
  std::vector<int> ells(2 * l_max + 1);
  for (int i = 0; i < 2 * l_max + 1; ++i) ells[i] = i - l_max;
  return ells;
}

}  // namespace

TEST_CASE("renormalization: single component and gauge/scale invariance") {
  WeakValueScan single;
  single.l_max = 13;
  single.values.assign(27, Complex(0, 0));
  single.values[13] = Complex(2.0, 0.0);
  single.sigma1.assign(27, 0.0);
  single.sigma2.assign(27, 0.0);
  single.uncertainties.assign(27, {0.0, 0.0});
  ReconstructedState r = renormalize_scan(single);
  CHECK(r.prob_density[13] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(r.state, OamState::basis(0, 13)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  WeakValueScan base =
      scan_from_state(rotate_state(aperture_state(2 * kPi / 9, 13), 0.4));
  WeakValueScan scaled = base;
  Complex c = Complex(0.3, -1.2);
  for (auto& v : scaled.values) v *= c;
  ReconstructedState r1 = renormalize_scan(base);
  ReconstructedState r2 = renormalize_scan(scaled);
  double total = 0.0;
  for (int i = 0; i < 27; ++i) {
    CHECK(std::abs(r1.state.amplitudes()[i] - r2.state.amplitudes()[i]) <
          1e-10);
    total += r1.prob_density[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r1.phase[13]) < 1e-12);  // gauge: phase(ell = 0) = 0

  WeakValueScan zero = single;
  zero.values.assign(27, Complex(0, 0));
  CHECK_THROWS_AS(renormalize_scan(zero), std::domain_error);
}

TEST_CASE("error propagation matches a Monte-Carlo oracle") {
  // uncertainty only on ell = 5 keeps the norm/gauge reference clean
  WeakValueScan base = scan_from_state(aperture_state(2 * kPi / 9, 13));
  const int idx = 13 + 5;
  const double er = 0.004, ei = 0.003;
  base.uncertainties[idx] = {er, ei};
  ReconstructedState nominal = renormalize_scan(base);

  SplitMix64 rng(SplitMix64::substream_key(77, 0));
  const int n = 4000;
  double sp = 0.0, sp2 = 0.0, sf = 0.0, sf2 = 0.0;
  for (int k = 0; k < n; ++k) {
    WeakValueScan jit = base;
    jit.values[idx] += Complex(er * normal_sample(rng), ei * normal_sample(rng));
    ReconstructedState r = renormalize_scan(jit);
    sp += r.prob_density[idx];
    sp2 += r.prob_density[idx] * r.prob_density[idx];
    sf += r.phase[idx];
    sf2 += r.phase[idx] * r.phase[idx];
  }
  double std_p = std::sqrt(sp2 / n - (sp / n) * (sp / n));
  double std_f = std::sqrt(sf2 / n - (sf / n) * (sf / n));
  CHECK(nominal.prob_err[idx] == doctest::Approx(std_p).epsilon(0.15));
  CHECK(nominal.phase_err[idx] == doctest::Approx(std_f).epsilon(0.15));
}

TEST_CASE("phase error is large where the amplitude vanishes") {
  WeakValueScan base = scan_from_state(aperture_state(2 * kPi / 9, 13));
  for (auto& u : base.uncertainties) u = {0.01, 0.01};
  ReconstructedState r = renormalize_scan(base);
  // exact null at ell = +/-9: phase error saturates at its cap
  CHECK(r.phase_err[13 + 9] == doctest::Approx(kPi));
  CHECK(r.phase_err[13] < 0.1);
}

TEST_CASE("sinc-squared fit: model to itself") {
  auto ells = ell_axis(13);
  std::vector<double> density(27);
  for (int i = 0; i < 27; ++i) {
    double x = kPi * ells[i] / 9.0;
    double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    density[i] = 0.25 * s * s;
  }
  FitResult fit = fit_sinc_squared(ells, density, {});
  CHECK(fit.param("delta_ell").value == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(fit.param("delta_ell").err < 1e-4);
  CHECK(fit.param("amplitude").value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(fit.chi2 < 1e-10);

  // idempotence: refit the fitted model
  std::vector<double> model(27);
  for (int i = 0; i < 27; ++i) {
    double x = kPi * ells[i] / fit.param("delta_ell").value;
    double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    model[i] = fit.param("amplitude").value * s * s;
  }
  FitResult refit = fit_sinc_squared(ells, model, {});
  CHECK(std::abs(refit.param("delta_ell").value -
                 fit.param("delta_ell").value) < 1e-8);
  CHECK(std::abs(refit.param("amplitude").value -
                 fit.param("amplitude").value) < 1e-8);
}

TEST_CASE("sinc-squared fit: other apertures and error cases") {
  ReconstructedState r5 =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 5, 13)));
  FitResult fit = fit_sinc_squared(ell_axis(13), r5.prob_density, {});
  CHECK(fit.param("delta_ell").value == doctest::Approx(5.0).epsilon(0.02));

  CHECK_THROWS_AS(fit_sinc_squared({0, 1, 2}, {1.0, 0.5, 0.1}, {}),
                  std::domain_error);
}

TEST_CASE("sinc-squared fit: noisy recovery within quoted errors") {
  auto ells = ell_axis(13);
  std::vector<double> truth(27);
  for (int i = 0; i < 27; ++i) {
    double x = kPi * ells[i] / 9.0;
    double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    truth[i] = s * s;
  }
  int hits = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng(SplitMix64::substream_key(seed, 5));
    std::vector<double> noisy(27), err(27, 0.01);
    for (int i = 0; i < 27; ++i)
      noisy[i] = truth[i] + 0.01 * normal_sample(rng);
    FitResult fit = fit_sinc_squared(ells, noisy, err);
    double dl = fit.param("delta_ell").value;
    double sig = fit.param("delta_ell").err;
    if (std::abs(dl - 9.0) <= 3.0 * sig) ++hits;
    CHECK(sig > 1e-4);  // uncertainty must be meaningful with noisy data
  }
  CHECK(hits >= 18);
}

TEST_CASE("quadratic phase fit: flat, synthetic aberration, sinc state") {
  auto ells = ell_axis(13);
  std::set<int> all(ells.begin(), ells.end());

  std::vector<double> flat(27, 0.0);
  FitResult f0 = fit_phase_quadratic(ells, flat, {}, all);
  CHECK(std::abs(f0.param("a").value) < 1e-12);
  CHECK(std::abs(f0.param("b").value) < 1e-12);
  CHECK(std::abs(f0.param("c").value) < 1e-12);

  // injected defocus + tilt with small supplied errors
  SplitMix64 rng(SplitMix64::substream_key(3, 1));
  std::vector<double> phase(27), err(27, 0.01);
  for (int i = 0; i < 27; ++i)
    phase[i] = 0.01 * ells[i] * ells[i] + 0.05 * ells[i] +
               0.01 * normal_sample(rng);
  FitResult f1 = fit_phase_quadratic(ells, phase, err, all);
  CHECK(std::abs(f1.param("a").value - 0.01) <= 3.0 * f1.param("a").err);
  CHECK(std::abs(f1.param("b").value - 0.05) <= 3.0 * f1.param("b").err);

  // noiseless sinc state: pi-jump-corrected phase is flat
  ReconstructedState r =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 9, 13)));
  std::set<int> mask = amplitude_mask(r);
  FitResult f2 = fit_phase_quadratic(ells, r.phase, {}, mask);
  CHECK(std::abs(f2.param("a").value) < 1e-9);
  CHECK(std::abs(f2.param("b").value) < 1e-9);
  CHECK(std::abs(f2.param("c").value) < 1e-9);

  CHECK_THROWS_AS(fit_phase_quadratic(ells, flat, {}, {0, 1, 2}),
                  std::domain_error);
}

TEST_CASE("linear chi-square fit: ramps, noise, degenerate weights") {
  auto ells = ell_axis(13);
  std::set<int> all(ells.begin(), ells.end());

  std::vector<double> ramp(27);
  for (int i = 0; i < 27; ++i) ramp[i] = kPi * ells[i] / 9.0;
  // wrap into principal values as a reconstruction would report them
  for (double& p : ramp) p = std::remainder(p, 2.0 * kPi);
  FitResult f = fit_phase_linear_chi2(ells, ramp, {}, all);
  CHECK(f.param("slope").value == doctest::Approx(kPi / 9.0).epsilon(1e-10));
  CHECK(std::abs(f.param("intercept").value) < 1e-10);
  CHECK(f.param("slope").err < 1e-8);

  std::vector<double> constant(27, 0.7);
  FitResult fc = fit_phase_linear_chi2(ells, constant, {}, all);
  CHECK(std::abs(fc.param("slope").value) < 1e-12);

  // Gaussian noise sigma = 0.05: slope recovered across seeds
  double sum = 0.0;
  const int n_seeds = 50;
  for (uint64_t seed = 0; seed < n_seeds; ++seed) {
    SplitMix64 rng(SplitMix64::substream_key(seed, 9));
    std::vector<double> noisy(27), err(27, 0.05);
    for (int i = 0; i < 27; ++i)
      noisy[i] = -kPi * ells[i] / 9.0 + 0.05 * normal_sample(rng);
    for (double& p : noisy) p = std::remainder(p, 2.0 * kPi);
    FitResult fn = fit_phase_linear_chi2(ells, noisy, err, all);
    sum += fn.param("slope").value;
    CHECK(fn.param("slope").err == doctest::Approx(0.0012).epsilon(0.3));
  }
  CHECK(sum / n_seeds == doctest::Approx(-kPi / 9.0).epsilon(0.01));

  // zero sigma on a point the straight line cannot reproduce
  std::vector<double> bad_err(27, 0.05);
  bad_err[13] = 0.0;
  std::vector<double> bent = ramp;
  bent[13] += 0.5;
  CHECK_THROWS_AS(fit_phase_linear_chi2(ells, bent, bad_err, all),
                  std::domain_error);
}

TEST_CASE("slope antisymmetry for opposite rotations") {
  auto ells = ell_axis(13);
  OamState s = aperture_state(2 * kPi / 9, 13);
  ReconstructedState r0 = renormalize_scan(scan_from_state(s));
  ReconstructedState rp =
      renormalize_scan(scan_from_state(rotate_state(s, kPi / 9)));
  ReconstructedState rm =
      renormalize_scan(scan_from_state(rotate_state(s, -kPi / 9)));
  std::set<int> mask = amplitude_mask(r0);
  std::vector<double> dp(27), dm(27);
  for (int i = 0; i < 27; ++i) {
    dp[i] = std::remainder(rp.phase[i] - r0.phase[i], 2.0 * kPi);
    dm[i] = std::remainder(rm.phase[i] - r0.phase[i], 2.0 * kPi);
  }
  FitResult fp = fit_phase_linear_chi2(ells, dp, {}, mask);
  FitResult fm = fit_phase_linear_chi2(ells, dm, {}, mask);
  CHECK(std::abs(fp.param("slope").value + fm.param("slope").value) < 1e-8);
  CHECK(fp.param("slope").value == doctest::Approx(kPi / 9.0).epsilon(1e-8));
}

TEST_CASE("pi-jump detection") {
  ReconstructedState r9 =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 9, 13)));
  CHECK(detect_pi_jumps(r9) == std::set<int>{-9, 9});
  // every jump sits at a local probability minimum by construction
  for (int j : detect_pi_jumps(r9)) {
    int i = j + 13;
    CHECK(r9.prob_density[i] <= r9.prob_density[i - 1]);
    CHECK(r9.prob_density[i] <= r9.prob_density[i + 1]);
  }

  WeakValueScan basis;
  basis.l_max = 13;
  basis.values.assign(27, Complex(0, 0));
  basis.values[13 + 4] = Complex(1.0, 0.0);
  basis.sigma1.assign(27, 0.0);
  basis.sigma2.assign(27, 0.0);
  basis.uncertainties.assign(27, {0.0, 0.0});
  CHECK(detect_pi_jumps(renormalize_scan(basis)).empty());

  ReconstructedState r5 =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 5, 13)));
  CHECK(detect_pi_jumps(r5) == std::set<int>{-10, -5, 5, 10});
}

TEST_CASE("amplitude mask applies the 1% rule") {
  ReconstructedState r =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 9, 13)));
  std::set<int> mask = amplitude_mask(r);
  CHECK(mask.count(0) == 1);
  CHECK(mask.count(13) == 1);   // ~4.7% of peak, retained
  CHECK(mask.count(9) == 0);    // exact null, excluded
  CHECK(mask.count(-9) == 0);
}

TEST_CASE("reconstruction CSV and fit JSON emitters") {
  ReconstructedState r =
      renormalize_scan(scan_from_state(aperture_state(2 * kPi / 9, 13)));
  std::stringstream ss;
  write_reconstruction_csv(ss, r);
  CHECK(ss.str().rfind("ell,prob,prob_err,phase,phase_err\n", 0) == 0);
  int lines = 0;
  for (char c : ss.str())
    if (c == '\n') ++lines;
  CHECK(lines == 28);

  FitResult fit = fit_sinc_squared(ell_axis(13), r.prob_density, {});
  std::string json = fit_result_json(fit);
  CHECK(json.find("\"model\": \"sinc-squared\"") != std::string::npos);
  CHECK(json.find("delta_ell") != std::string::npos);
  CHECK(json.find("chi2") != std::string::npos);
  CHECK_THROWS_AS(fit.param("nonexistent"), std::out_of_range);
}
