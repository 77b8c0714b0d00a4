#include "oamdm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "oamdm/errors.hpp"

namespace oamdm {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double wrap_pi(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x <= 0.0) x += 2.0 * kPi;
  return x - kPi;
}

// Solve the symmetric n x n normal equations by Gaussian elimination with
// partial pivoting; also returns the inverse for covariance extraction.
struct LinSolve {
  std::vector<double> x;
  std::vector<double> inv;  // row-major n x n
};

LinSolve solve_with_inverse(std::vector<double> a, std::vector<double> b, int n) {
  std::vector<double> inv(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r) * n + col]) >
          std::abs(a[static_cast<size_t>(piv) * n + col]))
        piv = r;
    if (std::abs(a[static_cast<size_t>(piv) * n + col]) < 1e-300)
      throw std::domain_error("singular normal equations");
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(piv) * n + c],
                  a[static_cast<size_t>(col) * n + c]);
        std::swap(inv[static_cast<size_t>(piv) * n + c],
                  inv[static_cast<size_t>(col) * n + c]);
      }
      std::swap(b[piv], b[col]);
    }
    double d = a[static_cast<size_t>(col) * n + col];
    for (int c = 0; c < n; ++c) {
      a[static_cast<size_t>(col) * n + c] /= d;
      inv[static_cast<size_t>(col) * n + c] /= d;
    }
    b[col] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[static_cast<size_t>(r) * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[static_cast<size_t>(r) * n + c] -=
            f * a[static_cast<size_t>(col) * n + c];
        inv[static_cast<size_t>(r) * n + c] -=
            f * inv[static_cast<size_t>(col) * n + c];
      }
      b[r] -= f * b[col];
    }
  }
  return {std::move(b), std::move(inv)};
}

// Weighted polynomial fit of given degree; shared by the two phase fits.
FitResult fit_polynomial(const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& errs, int degree,
                         const std::string& model,
                         const std::vector<std::string>& names) {
  const int n = static_cast<int>(xs.size());
  const int np = degree + 1;
  bool weighted = !errs.empty() &&
                  std::all_of(errs.begin(), errs.end(),
                              [](double e) { return e > 0.0; });
  bool any_zero = !errs.empty() &&
                  std::any_of(errs.begin(), errs.end(),
                              [](double e) { return e <= 0.0; });

  std::vector<double> w(n, 1.0);
  if (weighted)
    for (int i = 0; i < n; ++i) w[i] = 1.0 / (errs[i] * errs[i]);

  std::vector<double> ata(static_cast<size_t>(np) * np, 0.0), atb(np, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(np);
    double p = 1.0;
    for (int k = 0; k < np; ++k) {
      row[k] = p;
      p *= xs[i];
    }
    for (int r = 0; r < np; ++r) {
      atb[r] += w[i] * row[r] * ys[i];
      for (int c = 0; c < np; ++c)
        ata[static_cast<size_t>(r) * np + c] += w[i] * row[r] * row[c];
    }
  }
  LinSolve sol = solve_with_inverse(ata, atb, np);

  double chi2 = 0.0;
  std::vector<double> resid(n);
  for (int i = 0; i < n; ++i) {
    double m = 0.0, p = 1.0;
    for (int k = 0; k < np; ++k) {
      m += sol.x[k] * p;
      p *= xs[i];
    }
    resid[i] = ys[i] - m;
    chi2 += w[i] * resid[i] * resid[i];
  }
  int dof = n - np;

  if (any_zero && !weighted) {
    // sigma = 0 points must be exactly reproduced, else the weights are
    // degenerate by the chi-square definition.
    for (int i = 0; i < n; ++i)
      if (errs[i] <= 0.0 && std::abs(resid[i]) > 1e-6)
        throw std::domain_error(
            "degenerate weights: zero-error point inconsistent with fit");
  }

  double scale = 1.0;
  if (!weighted) scale = dof > 0 ? chi2 / dof : 0.0;

  FitResult fit;
  fit.model = model;
  fit.chi2 = chi2;
  fit.dof = dof;
  for (int k = 0; k < np; ++k) {
    double var = sol.inv[static_cast<size_t>(k) * np + k] * scale;
    // names are given highest-degree first
    fit.params.push_back(
        {names[np - 1 - k], sol.x[k], std::sqrt(std::max(var, 0.0))});
  }
  std::reverse(fit.params.begin(), fit.params.end());
  return fit;
}

}  // namespace

const FitParam& FitResult::param(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw std::out_of_range("no fit parameter named " + name);
}

ReconstructedState renormalize_scan(const WeakValueScan& scan) {
  double n2 = 0.0;
  for (const auto& v : scan.values) n2 += std::norm(v);
  if (n2 <= 0.0) throw std::domain_error("cannot renormalize an all-zero scan");

  OamState raw(scan.values, scan.l_max);
  OamState state = raw.normalized().gauge_fixed();

  ReconstructedState out{state, {}, {}, {}, {}};
  const int d = state.dim();
  out.prob_density.resize(d);
  out.phase.resize(d);
  out.prob_err.resize(d);
  out.phase_err.resize(d);
  for (int i = 0; i < d; ++i) {
    Complex a = state.amplitudes()[i];
    out.prob_density[i] = std::norm(a);
    out.phase[i] = std::abs(a) > 0.0 ? std::arg(a) : 0.0;
    Complex w = scan.values[i];
    double er = scan.uncertainties[i].first, ei = scan.uncertainties[i].second;
    double mag2 = std::norm(w);
    // first-order propagation; the norm is treated as fixed
    out.prob_err[i] =
        2.0 * std::sqrt(w.real() * w.real() * er * er +
                        w.imag() * w.imag() * ei * ei) / n2;
    out.phase_err[i] =
        mag2 > 0.0 ? std::sqrt(w.imag() * w.imag() * er * er +
                               w.real() * w.real() * ei * ei) / mag2
                   : kPi;
  }
  return out;
}

FitResult fit_sinc_squared(const std::vector<int>& ells,
                           const std::vector<double>& density,
                           const std::vector<double>& err) {
  const int n = static_cast<int>(ells.size());
  if (n < 5) throw std::domain_error("sinc-squared fit needs >= 5 points");
  if (density.size() != ells.size())
    throw std::domain_error("density size mismatch");

  bool weighted = !err.empty() && std::all_of(err.begin(), err.end(),
                                              [](double e) { return e > 0.0; });
  std::vector<double> w(n, 1.0);
  if (weighted)
    for (int i = 0; i < n; ++i) w[i] = 1.0 / (err[i] * err[i]);

  int l_hi = 0;
  for (int e : ells) l_hi = std::max(l_hi, std::abs(e));
  const double dl_lo = 1.0, dl_hi = 4.0 * std::max(l_hi, 1);

  auto chi2_of = [&](double dl, double* a_out = nullptr) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = sinc(kPi * ells[i] / dl);
      m *= m;
      num += w[i] * m * density[i];
      den += w[i] * m * m;
    }
    double a = den > 0.0 ? num / den : 0.0;
    if (a_out) *a_out = a;
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = sinc(kPi * ells[i] / dl);
      double r = density[i] - a * m * m;
      c += w[i] * r * r;
    }
    return c;
  };

  // coarse scan, then golden-section refinement
  double best_dl = dl_lo, best_chi2 = chi2_of(dl_lo);
  for (double dl = dl_lo; dl <= dl_hi; dl += 0.02) {
    double c = chi2_of(dl);
    if (c < best_chi2) {
      best_chi2 = c;
      best_dl = dl;
    }
  }
  double lo = std::max(dl_lo, best_dl - 0.04), hi = std::min(dl_hi, best_dl + 0.04);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = chi2_of(c1), f2 = chi2_of(c2);
  int iter = 0;
  while (hi - lo > 1e-10) {
    if (++iter > 200)
      throw FitFailureError("sinc-squared fit did not converge", 0.5 * (lo + hi));
    if (f1 < f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = chi2_of(c1);
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = chi2_of(c2);
    }
  }
  double dl = 0.5 * (lo + hi);
  double amp;
  double chi2 = chi2_of(dl, &amp);

  // covariance from the numerical Hessian of chi2(A, dl)
  auto chi2_at = [&](double a, double d) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = sinc(kPi * ells[i] / d);
      double r = density[i] - a * m * m;
      c += w[i] * r * r;
    }
    return c;
  };
  double ha = std::max(1e-7, 1e-5 * std::abs(amp));
  double hd = std::max(1e-6, 1e-5 * dl);
  double f0 = chi2_at(amp, dl);
  double haa = (chi2_at(amp + ha, dl) - 2.0 * f0 + chi2_at(amp - ha, dl)) / (ha * ha);
  double hdd = (chi2_at(amp, dl + hd) - 2.0 * f0 + chi2_at(amp, dl - hd)) / (hd * hd);
  double had = (chi2_at(amp + ha, dl + hd) - chi2_at(amp + ha, dl - hd) -
                chi2_at(amp - ha, dl + hd) + chi2_at(amp - ha, dl - hd)) /
               (4.0 * ha * hd);
  double det = haa * hdd - had * had;
  double var_a = 0.0, var_d = 0.0;
  if (det > 0.0) {
    var_a = 2.0 * hdd / det;
    var_d = 2.0 * haa / det;
  }
  int dof = n - 2;
  if (!weighted) {
    double s2 = dof > 0 ? chi2 / dof : 0.0;
    var_a *= s2;
    var_d *= s2;
  }

  FitResult fit;
  fit.model = "sinc-squared";
  fit.chi2 = chi2;
  fit.dof = dof;
  fit.params.push_back({"amplitude", amp, std::sqrt(std::max(var_a, 0.0))});
  fit.params.push_back({"delta_ell", dl, std::sqrt(std::max(var_d, 0.0))});
  return fit;
}

std::vector<double> sign_corrected_phase(const std::vector<int>& ells,
                                         const std::vector<double>& phase,
                                         const std::set<int>& mask) {
  std::vector<int> keep;
  for (size_t i = 0; i < ells.size(); ++i)
    if (mask.count(ells[i])) keep.push_back(static_cast<int>(i));
  std::vector<double> out(phase.size(), 0.0);
  if (keep.empty()) return out;

  std::vector<double> corr(keep.size());
  corr[0] = phase[keep[0]];
  for (size_t k = 1; k < keep.size(); ++k) {
    double d = wrap_pi(phase[keep[k]] - phase[keep[k - 1]]);
    if (std::abs(std::abs(d) - kPi) <= 0.5)
      d -= (d > 0.0 ? kPi : -kPi);  // fold out the sign-change jump
    corr[k] = corr[k - 1] + d;
  }
  // reference the point closest to ell = 0
  size_t k0 = 0;
  for (size_t k = 1; k < keep.size(); ++k)
    if (std::abs(ells[keep[k]]) < std::abs(ells[keep[k0]])) k0 = k;
  double ref = corr[k0];
  for (size_t k = 0; k < keep.size(); ++k) out[keep[k]] = corr[k] - ref;
  return out;
}

namespace {

FitResult fit_phase_poly(const std::vector<int>& ells,
                         const std::vector<double>& phase,
                         const std::vector<double>& err,
                         const std::set<int>& mask, int degree,
                         const std::string& model,
                         const std::vector<std::string>& names,
                         bool remove_jumps) {
  std::vector<double> xs, ys, es;
  std::vector<double> use =
      remove_jumps ? sign_corrected_phase(ells, phase, mask) : phase;
  for (size_t i = 0; i < ells.size(); ++i) {
    if (!mask.count(ells[i])) continue;
    xs.push_back(ells[i]);
    ys.push_back(use[i]);
    es.push_back(err.empty() ? 0.0 : err[i]);
  }
  if (static_cast<int>(xs.size()) < degree + 2)
    throw std::domain_error("mask leaves the phase fit under-determined");
  bool all_zero = std::all_of(es.begin(), es.end(),
                              [](double e) { return e <= 0.0; });
  if (all_zero) es.clear();
  return fit_polynomial(xs, ys, es, degree, model, names);
}

}  // namespace

FitResult fit_phase_quadratic(const std::vector<int>& ells,
                              const std::vector<double>& phase,
                              const std::vector<double>& err,
                              const std::set<int>& mask) {
  return fit_phase_poly(ells, phase, err, mask, 2, "quadratic-phase",
                        {"a", "b", "c"}, true);
}

FitResult fit_phase_linear_chi2(const std::vector<int>& ells,
                                const std::vector<double>& phase,
                                const std::vector<double>& err,
                                const std::set<int>& mask) {
  return fit_phase_poly(ells, phase, err, mask, 1, "linear-phase",
                        {"slope", "intercept"}, true);
}

std::set<int> detect_pi_jumps(const ReconstructedState& state, double tol) {
  std::set<int> jumps;
  const int d = state.dim();
  for (int i = 1; i + 1 < d; ++i) {
    const double p = state.prob_density[i];
    if (p > state.prob_density[i - 1] || p > state.prob_density[i + 1])
      continue;  // not a local minimum
    if (state.prob_density[i - 1] == p && state.prob_density[i + 1] == p &&
        p == 0.0)
      continue;  // flat zero plateau, no structure
    double dphi = wrap_pi(state.phase[i + 1] - state.phase[i - 1]);
    if (std::abs(std::abs(dphi) - kPi) <= tol)
      jumps.insert(i - state.l_max());
  }
  return jumps;
}

std::set<int> amplitude_mask(const ReconstructedState& state, double frac) {
  double peak = 0.0;
  for (double p : state.prob_density) peak = std::max(peak, p);
  std::set<int> mask;
  for (int i = 0; i < state.dim(); ++i)
    if (state.prob_density[i] >= frac * peak) mask.insert(i - state.l_max());
  return mask;
}

void write_reconstruction_csv(std::ostream& os, const ReconstructedState& r) {
  os << "ell,prob,prob_err,phase,phase_err\n";
  char buf[192];
  for (int i = 0; i < r.dim(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                  i - r.l_max(), r.prob_density[i], r.prob_err[i], r.phase[i],
                  r.phase_err[i]);
    os << buf;
  }
}

void write_reconstruction_csv_file(const std::string& path,
                                   const ReconstructedState& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_reconstruction_csv(os, r);
}

std::string fit_result_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.model;
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : fit.params)
    params[p.name] = {{"value", p.value}, {"err", p.err}};
  j["params"] = params;
  return j.dump(2);
}

}  // namespace oamdm
