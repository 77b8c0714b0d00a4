#include "oamdm/oam_state.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oamdm {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  // snap analytic nulls (x an exact multiple of pi) so downstream code can
  // rely on vanishing amplitudes instead of O(1e-17) rounding residue
  double cycles = x / std::numbers::pi;
  if (std::abs(cycles - std::round(cycles)) < 1e-12) return 0.0;
  return std::sin(x) / x;
}

}  // namespace

OamState::OamState(std::vector<Complex> amplitudes, int l_max)
    : amps_(std::move(amplitudes)), l_max_(l_max) {
  if (l_max_ < 0) throw std::domain_error("l_max must be >= 0");
  if (static_cast<int>(amps_.size()) != 2 * l_max_ + 1)
    throw std::domain_error("amplitude count does not match 2*l_max+1");
}

OamState OamState::basis(int ell, int l_max) {
  if (ell < -l_max || ell > l_max)
    throw std::domain_error("basis index outside [-l_max, l_max]");
  std::vector<Complex> a(2 * l_max + 1, Complex(0.0, 0.0));
  a[ell + l_max] = 1.0;
  return OamState(std::move(a), l_max);
}

int OamState::index_of(int ell) const {
  if (ell < -l_max_ || ell > l_max_)
    throw std::domain_error("ell outside [-l_max, l_max]");
  return ell + l_max_;
}

double OamState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

OamState OamState::normalized() const {
  double n2 = norm_squared();
  if (n2 <= 0.0) throw std::domain_error("cannot normalize the zero state");
  double inv = 1.0 / std::sqrt(n2);
  std::vector<Complex> a = amps_;
  for (auto& v : a) v *= inv;
  return OamState(std::move(a), l_max_);
}

OamState OamState::gauge_fixed() const {
  Complex ref = amps_[l_max_];  // a_0
  if (std::abs(ref) == 0.0) {
    auto it = std::max_element(amps_.begin(), amps_.end(),
                               [](const Complex& a, const Complex& b) {
                                 return std::abs(a) < std::abs(b);
                               });
    ref = *it;
  }
  if (std::abs(ref) == 0.0) return *this;
  Complex phase = std::conj(ref) / std::abs(ref);
  std::vector<Complex> a = amps_;
  for (auto& v : a) v *= phase;
  return OamState(std::move(a), l_max_);
}

double AngularBasisSpec::theta(int n) const {
  if (n < 0 || n >= d) throw std::domain_error("theta index outside [0, d)");
  return 2.0 * std::numbers::pi * n / d;
}

OamState aperture_state(double delta_theta, int l_max) {
  if (!(delta_theta > 0.0) || delta_theta > 2.0 * std::numbers::pi)
    throw std::domain_error("aperture width must lie in (0, 2*pi]");
  if (l_max < 1) throw std::domain_error("l_max must be >= 1");
  std::vector<Complex> a(2 * l_max + 1);
  for (int ell = -l_max; ell <= l_max; ++ell)
    a[ell + l_max] = sinc(delta_theta * ell / 2.0);
  return OamState(std::move(a), l_max).normalized();
}

OamState rotate_state(const OamState& state, double theta0) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta0, two_pi);
  std::vector<Complex> a(state.dim());
  for (int ell = -state.l_max(); ell <= state.l_max(); ++ell)
    a[ell + state.l_max()] =
        state.amplitude(ell) * std::polar(1.0, ell * t);
  return OamState(std::move(a), state.l_max());
}

Complex angle_overlap(const AngularBasisSpec& spec, int n, const OamState& state) {
  if (spec.d != state.dim())
    throw std::domain_error("angular basis dimension does not match the state");
  double theta_n = spec.theta(n);
  Complex acc(0.0, 0.0);
  for (int ell = -state.l_max(); ell <= state.l_max(); ++ell)
    acc += std::polar(1.0, -ell * theta_n) * state.amplitude(ell);
  return acc / std::sqrt(static_cast<double>(spec.d));
}

double fidelity(const OamState& a, const OamState& b) {
  if (a.dim() != b.dim())
    throw std::domain_error("fidelity requires equal dimensions");
  Complex ov(0.0, 0.0);
  for (int i = 0; i < a.dim(); ++i)
    ov += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  double na = a.norm_squared(), nb = b.norm_squared();
  if (na <= 0.0 || nb <= 0.0)
    throw std::domain_error("fidelity of a zero state is undefined");
  return std::norm(ov) / (na * nb);
}

void write_state_csv(std::ostream& os, const OamState& state) {
  os << "ell,re,im\n";
  char buf[96];
  for (int ell = -state.l_max(); ell <= state.l_max(); ++ell) {
    Complex a = state.amplitude(ell);
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", ell, a.real(), a.imag());
    os << buf;
  }
}

OamState read_state_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty state CSV");
  if (line.rfind("ell,re,im", 0) != 0)
    throw std::runtime_error("state CSV must start with header 'ell,re,im'");
  std::vector<std::pair<int, Complex>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    int ell;
    double re, im;
    std::getline(ss, tok, ',');
    ell = std::stoi(tok);
    std::getline(ss, tok, ',');
    re = std::stod(tok);
    std::getline(ss, tok, ',');
    im = std::stod(tok);
    rows.emplace_back(ell, Complex(re, im));
  }
  if (rows.empty()) throw std::runtime_error("state CSV has no rows");
  int l_max = 0;
  for (const auto& [ell, a] : rows) l_max = std::max(l_max, std::abs(ell));
  std::vector<Complex> amps(2 * l_max + 1, Complex(0.0, 0.0));
  for (const auto& [ell, a] : rows) amps[ell + l_max] = a;
  return OamState(std::move(amps), l_max);
}

void write_state_csv_file(const std::string& path, const OamState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_state_csv(os, state);
}

OamState read_state_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_state_csv(is);
}

}  // namespace oamdm
