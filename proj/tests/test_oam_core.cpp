#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oamdm/oam_state.hpp"

using namespace oamdm;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("basis states and indexing") {
  OamState s = OamState::basis(3, 13);
  CHECK(s.dim() == 27);
  CHECK(s.amplitude(3) == Complex(1.0, 0.0));
  CHECK(s.amplitude(-3) == Complex(0.0, 0.0));
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(OamState::basis(14, 13), std::domain_error);
  CHECK_THROWS_AS(s.index_of(14), std::domain_error);
  CHECK_THROWS_AS(OamState({Complex(1, 0), Complex(0, 0)}, 1),
                  std::domain_error);
}

TEST_CASE("aperture state: first null at 2*pi/delta_theta") {
  OamState s = aperture_state(2.0 * kPi / 9.0, 13);
  CHECK(std::abs(s.amplitude(9)) == 0.0);  // sin(pi) = 0 exactly via sinc
  CHECK(std::abs(s.amplitude(-9)) == 0.0);
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  // independent scalar evaluation of the amplitude ratio
  double x = 2.0 * kPi / 9.0 * 4.0 / 2.0;  // delta_theta*ell/2 at ell = 4
  double expected = std::sin(x) / x;
  CHECK(s.amplitude(4).real() / s.amplitude(0).real() ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("aperture state: full aperture passes only ell = 0") {
  OamState s = aperture_state(2.0 * kPi, 13);
  CHECK(s.amplitude(0).real() == doctest::Approx(1.0).epsilon(1e-12));
  for (int ell = 1; ell <= 13; ++ell) {
    CHECK(std::abs(s.amplitude(ell)) == 0.0);
    CHECK(std::abs(s.amplitude(-ell)) == 0.0);
  }
}

TEST_CASE("aperture null placement for integer divisors") {
  for (int m : {5, 7, 13}) {
    OamState s = aperture_state(2.0 * kPi / m, 13);
    CHECK(std::abs(s.amplitude(m)) == 0.0);
    CHECK(std::abs(s.amplitude(-m)) == 0.0);
  }
}

TEST_CASE("aperture state domain errors") {
  CHECK_THROWS_AS(aperture_state(0.0, 13), std::domain_error);
  CHECK_THROWS_AS(aperture_state(-1.0, 13), std::domain_error);
  CHECK_THROWS_AS(aperture_state(2.0 * kPi + 0.1, 13), std::domain_error);
  CHECK_THROWS_AS(aperture_state(1.0, 0), std::domain_error);
}

TEST_CASE("rotation: identity, phase ramp, composition") {
  OamState s = aperture_state(2.0 * kPi / 9.0, 13);

  OamState id = rotate_state(s, 0.0);
  for (int ell = -13; ell <= 13; ++ell)
    CHECK(std::abs(id.amplitude(ell) - s.amplitude(ell)) < 1e-15);

  OamState r = rotate_state(s, kPi / 9.0);
  for (int ell = -8; ell < 8; ++ell) {
    if (std::abs(s.amplitude(ell)) < 1e-12 ||
        std::abs(s.amplitude(ell + 1)) < 1e-12)
      continue;
    if (s.amplitude(ell).real() * s.amplitude(ell + 1).real() < 0.0) continue;
    double d = std::arg(r.amplitude(ell + 1)) - std::arg(r.amplitude(ell));
    d = std::remainder(d, 2.0 * kPi);
    CHECK(d == doctest::Approx(kPi / 9.0).epsilon(1e-10));
  }

  OamState ab = rotate_state(rotate_state(s, 0.37), 1.11);
  OamState apb = rotate_state(s, 0.37 + 1.11);
  for (int ell = -13; ell <= 13; ++ell)
    CHECK(std::abs(ab.amplitude(ell) - apb.amplitude(ell)) < 1e-12);

  // magnitudes are exactly preserved
  for (int ell = -13; ell <= 13; ++ell)
    CHECK(std::abs(r.amplitude(ell)) ==
          doctest::Approx(std::abs(s.amplitude(ell))).epsilon(1e-14));
}

TEST_CASE("rotation of a basis state is a global phase") {
  OamState s = OamState::basis(3, 13);
  OamState r = rotate_state(s, kPi / 2.0);
  CHECK(fidelity(s, r) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::arg(r.amplitude(3)) ==
        doctest::Approx(std::remainder(3.0 * kPi / 2.0, 2.0 * kPi))
            .epsilon(1e-12));
}

TEST_CASE("angle overlap: flat state is an angular basis state") {
  int l_max = 13, d = 27;
  std::vector<Complex> a(d, Complex(1.0 / std::sqrt(27.0), 0.0));
  OamState flat(a, l_max);
  AngularBasisSpec spec{d};
  CHECK(std::abs(angle_overlap(spec, 0, flat) - Complex(1.0, 0.0)) < 1e-12);
  for (int n = 1; n < d; ++n)
    CHECK(std::abs(angle_overlap(spec, n, flat)) < 1e-12);
}

TEST_CASE("mutual unbiasedness: every overlap magnitude is 1/sqrt(d)") {
  int l_max = 13, d = 27;
  AngularBasisSpec spec{d};
  for (int ell = -l_max; ell <= l_max; ++ell) {
    OamState s = OamState::basis(ell, l_max);
    for (int n = 0; n < d; ++n)
      CHECK(std::abs(std::abs(angle_overlap(spec, n, s)) -
                     1.0 / std::sqrt(27.0)) < 1e-12);
  }
}

TEST_CASE("angle transform is unitary and invertible") {
  int l_max = 13, d = 27;
  OamState s = rotate_state(aperture_state(2.0 * kPi / 9.0, l_max), 0.7);
  AngularBasisSpec spec{d};

  double total = 0.0;
  std::vector<Complex> overlaps(d);
  for (int n = 0; n < d; ++n) {
    overlaps[n] = angle_overlap(spec, n, s);
    total += std::norm(overlaps[n]);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // inverse transform: a_ell = (1/sqrt(d)) sum_n exp(+i ell theta_n) <theta_n|Psi>
  for (int ell = -l_max; ell <= l_max; ++ell) {
    Complex acc(0.0, 0.0);
    for (int n = 0; n < d; ++n)
      acc += std::polar(1.0, ell * spec.theta(n)) * overlaps[n];
    acc /= std::sqrt(static_cast<double>(d));
    CHECK(std::abs(acc - s.amplitude(ell)) < 1e-10);
  }

  AngularBasisSpec wrong{25};
  CHECK_THROWS_AS(angle_overlap(wrong, 0, s), std::domain_error);
}

TEST_CASE("fidelity basics and rotated-sinc oracle") {
  OamState s = aperture_state(2.0 * kPi / 9.0, 13);
  CHECK(fidelity(s, s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(OamState::basis(0, 13), OamState::basis(1, 13)) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(fidelity(OamState::basis(0, 2), OamState::basis(0, 3)),
                  std::domain_error);

  // brute-force |sum |a_ell|^2 e^{i ell pi/9}|^2
  OamState r = rotate_state(s, kPi / 9.0);
  Complex acc(0.0, 0.0);
  for (int ell = -13; ell <= 13; ++ell)
    acc += std::norm(s.amplitude(ell)) * std::polar(1.0, ell * kPi / 9.0);
  CHECK(fidelity(s, r) == doctest::Approx(std::norm(acc)).epsilon(1e-12));
}

TEST_CASE("normalize and gauge fixing") {
  std::vector<Complex> a(27, Complex(0.0, 0.0));
  a[13] = Complex(0.0, 2.0);  // a_0 purely imaginary
  a[14] = Complex(1.0, 1.0);
  OamState s = OamState(a, 13).normalized().gauge_fixed();
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.amplitude(0).imag() == doctest::Approx(0.0));
  CHECK(s.amplitude(0).real() > 0.0);

  std::vector<Complex> zero(27, Complex(0.0, 0.0));
  CHECK_THROWS_AS(OamState(zero, 13).normalized(), std::domain_error);

  // a_0 = 0: the largest component becomes real positive
  std::vector<Complex> b(27, Complex(0.0, 0.0));
  b[20] = Complex(0.0, -3.0);
  b[5] = Complex(0.1, 0.0);
  OamState g = OamState(b, 13).gauge_fixed();
  CHECK(g.amplitude(7).imag() == doctest::Approx(0.0));
  CHECK(g.amplitude(7).real() > 0.0);
}

TEST_CASE("state CSV round trip is exact") {
  OamState s = rotate_state(aperture_state(2.0 * kPi / 9.0, 13), 0.123456789);
  std::stringstream ss;
  write_state_csv(ss, s);
  std::string text = ss.str();
  CHECK(text.rfind("ell,re,im\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);

  OamState back = read_state_csv(ss);
  REQUIRE(back.dim() == s.dim());
  for (int ell = -13; ell <= 13; ++ell)
    CHECK(back.amplitude(ell) == s.amplitude(ell));  // %.17g is lossless
}
