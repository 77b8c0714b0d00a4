#include "oamdm/weak_measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oamdm/errors.hpp"

namespace oamdm {

JointState JointState::prepare(const OamState& system) {
  JointState js;
  js.l_max = system.l_max();
  js.amps.resize(system.dim());
  for (int i = 0; i < system.dim(); ++i) {
    js.amps[i][0] = Complex(0.0, 0.0);            // H
    js.amps[i][1] = system.amplitudes()[i];        // V, |s_i> = (0, 1)
  }
  return js;
}

double JointState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps) s += std::norm(a[0]) + std::norm(a[1]);
  return s;
}

void CouplingSpec::validate(int l_max) const {
  if (!(alpha >= 0.0) || alpha > std::acos(-1.0) / 2.0)
    throw std::domain_error("coupling alpha must lie in [0, pi/2]");
  if (target_ell < -l_max || target_ell > l_max)
    throw std::domain_error("coupling target_ell outside [-l_max, l_max]");
}

CouplingUnitary::CouplingUnitary(const CouplingSpec& spec, int l_max)
    : l_max_(l_max), target_ell_(spec.target_ell) {
  spec.validate(l_max);
  // exp(i*s*sigma_2/2) = cos(s/2) I + i sin(s/2) sigma_2
  //                    = [[c, s2], [-s2, c]] with c=cos(s/2), s2=sin(s/2).
  double s = std::sin(spec.alpha);
  double c = std::cos(s / 2.0), s2 = std::sin(s / 2.0);
  block_[0][0] = c;
  block_[0][1] = s2;
  block_[1][0] = -s2;
  block_[1][1] = c;
}

void CouplingUnitary::apply(JointState& state) const {
  int i = target_ell_ + l_max_;
  Complex h = state.amps[i][0], v = state.amps[i][1];
  state.amps[i][0] = block_[0][0] * h + block_[0][1] * v;
  state.amps[i][1] = block_[1][0] * h + block_[1][1] * v;
}

std::vector<Complex> CouplingUnitary::dense() const {
  int n = dim();
  std::vector<Complex> m(static_cast<size_t>(n) * n, Complex(0.0, 0.0));
  for (int i = 0; i < n; ++i) m[static_cast<size_t>(i) * n + i] = 1.0;
  int base = 2 * (target_ell_ + l_max_);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      m[static_cast<size_t>(base + p) * n + (base + q)] = block_[p][q];
  return m;
}

PointerState weak_then_strong(const OamState& state, const CouplingSpec& spec,
                              int theta_index) {
  spec.validate(state.l_max());
  const OamState norm = state.normalized();
  AngularBasisSpec basis{norm.dim()};

  Complex bare = angle_overlap(basis, theta_index, norm);
  if (std::norm(bare) < 1e-30)
    throw DegeneratePostselectionError(
        spec.target_ell, "post-selection amplitude <theta_n|Psi> vanishes");

  JointState joint = JointState::prepare(norm);
  CouplingUnitary u(spec, norm.l_max());
  u.apply(joint);

  // Project the OAM register onto <theta_n|.
  double theta_n = basis.theta(theta_index);
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(norm.dim()));
  std::array<Complex, 2> pointer{Complex(0.0, 0.0), Complex(0.0, 0.0)};
  for (int ell = -norm.l_max(); ell <= norm.l_max(); ++ell) {
    Complex phase = std::polar(inv_sqrt_d, -ell * theta_n);
    int i = ell + norm.l_max();
    pointer[0] += phase * joint.amps[i][0];
    pointer[1] += phase * joint.amps[i][1];
  }

  double prob = std::norm(pointer[0]) + std::norm(pointer[1]);
  if (prob < 1e-30)
    throw DegeneratePostselectionError(
        spec.target_ell, "post-selection probability vanishes");
  double inv = 1.0 / std::sqrt(prob);
  return PointerState{{pointer[0] * inv, pointer[1] * inv}, prob};
}

PauliExpectations pauli_expectations(const std::array<Complex, 2>& pointer) {
  double n2 = std::norm(pointer[0]) + std::norm(pointer[1]);
  if (n2 <= 0.0) throw std::domain_error("pauli expectations of a zero pointer");
  Complex z = std::conj(pointer[0]) * pointer[1];
  return PauliExpectations{
      2.0 * z.real() / n2,
      2.0 * z.imag() / n2,
      (std::norm(pointer[0]) - std::norm(pointer[1])) / n2,
  };
}

WeakValueScan direct_measure(const OamState& state, double alpha,
                             int theta_index) {
  double s = std::sin(alpha);
  if (!(s > 0.0)) throw std::domain_error("direct_measure requires sin(alpha) > 0");
  const OamState norm = state.normalized();

  WeakValueScan scan;
  scan.l_max = norm.l_max();
  scan.sin_alpha = s;
  scan.values.resize(norm.dim());
  scan.sigma1.resize(norm.dim());
  scan.sigma2.resize(norm.dim());
  scan.uncertainties.assign(norm.dim(), {0.0, 0.0});

  for (int ell = -norm.l_max(); ell <= norm.l_max(); ++ell) {
    PointerState p = weak_then_strong(norm, CouplingSpec{alpha, ell}, theta_index);
    PauliExpectations e = pauli_expectations(p.amps);
    int i = ell + norm.l_max();
    scan.sigma1[i] = e.sigma1;
    scan.sigma2[i] = e.sigma2;
    scan.values[i] = Complex(e.sigma1, -e.sigma2) / s;
  }
  return scan;
}

void write_scan_csv(std::ostream& os, const WeakValueScan& scan) {
  os << "ell,re_w,im_w,sigma1,sigma2,err_re,err_im\n";
  char buf[192];
  for (int i = 0; i < scan.dim(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  i - scan.l_max, scan.values[i].real(), scan.values[i].imag(),
                  scan.sigma1[i], scan.sigma2[i], scan.uncertainties[i].first,
                  scan.uncertainties[i].second);
    os << buf;
  }
}

WeakValueScan read_scan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty scan CSV");
  if (line.rfind("ell,re_w,im_w,sigma1,sigma2,err_re,err_im", 0) != 0)
    throw std::runtime_error("unexpected scan CSV header");
  struct Row {
    int ell;
    double re, im, s1, s2, er, ei;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row r;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg,%lg,%lg", &r.ell, &r.re,
                    &r.im, &r.s1, &r.s2, &r.er, &r.ei) != 7)
      throw std::runtime_error("malformed scan CSV row: " + line);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("scan CSV has no rows");
  int l_max = 0;
  for (const auto& r : rows) l_max = std::max(l_max, std::abs(r.ell));
  WeakValueScan scan;
  scan.l_max = l_max;
  scan.values.assign(2 * l_max + 1, Complex(0.0, 0.0));
  scan.sigma1.assign(2 * l_max + 1, 0.0);
  scan.sigma2.assign(2 * l_max + 1, 0.0);
  scan.uncertainties.assign(2 * l_max + 1, {0.0, 0.0});
  for (const auto& r : rows) {
    int i = r.ell + l_max;
    scan.values[i] = Complex(r.re, r.im);
    scan.sigma1[i] = r.s1;
    scan.sigma2[i] = r.s2;
    scan.uncertainties[i] = {r.er, r.ei};
  }
  return scan;
}

void write_scan_csv_file(const std::string& path, const WeakValueScan& scan) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_scan_csv(os, scan);
}

WeakValueScan read_scan_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_scan_csv(is);
}

}  // namespace oamdm
