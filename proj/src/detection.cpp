#include "oamdm/detection.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "oamdm/errors.hpp"
#include "oamdm/rng.hpp"

namespace oamdm {

void NoiseSpec::validate() const {
  if (dark_rate_hz < 0.0) throw std::domain_error("dark_rate_hz must be >= 0");
  if (background_rate_hz < 0.0)
    throw std::domain_error("background_rate_hz must be >= 0");
  if (integration_s < 0.0) throw std::domain_error("integration_s must be >= 0");
}

std::pair<double, double> port_probabilities(const std::array<Complex, 2>& pointer,
                                             AnalysisBasis basis) {
  const double inv_sqrt2 = std::sqrt(0.5);
  Complex plus, minus;
  if (basis == AnalysisBasis::kLinearDiagonal) {
    // |+> = (|H>+|V>)/sqrt(2), |-> = (|H>-|V>)/sqrt(2)
    plus = inv_sqrt2 * (pointer[0] + pointer[1]);
    minus = inv_sqrt2 * (pointer[0] - pointer[1]);
  } else {
    // sigma_2 eigenvectors: |L> = (|H>+i|V>)/sqrt(2), |R> = (|H>-i|V>)/sqrt(2)
    plus = inv_sqrt2 * (pointer[0] - Complex(0.0, 1.0) * pointer[1]);
    minus = inv_sqrt2 * (pointer[0] + Complex(0.0, 1.0) * pointer[1]);
  }
  double n2 = std::norm(pointer[0]) + std::norm(pointer[1]);
  return {std::norm(plus) / n2, std::norm(minus) / n2};
}

CountRecord simulate_counts(const std::vector<PointerState>& pointer_states,
                            int l_max, const NoiseSpec& noise) {
  noise.validate();
  if (pointer_states.size() != static_cast<size_t>(2 * l_max + 1))
    throw std::domain_error("pointer state count does not match 2*l_max+1");

  CountRecord rec;
  rec.l_max = l_max;
  rec.counts.resize(rec.dim());
  rec.postselection_prob.resize(rec.dim());

  const double nuisance = noise.nuisance_mean();
  for (int i = 0; i < rec.dim(); ++i) {
    const PointerState& ps = pointer_states[i];
    rec.postselection_prob[i] = ps.postselection_prob;
    for (int b = 0; b < 2; ++b) {
      auto [p_plus, p_minus] =
          port_probabilities(ps.amps, static_cast<AnalysisBasis>(b));
      double signal = static_cast<double>(noise.photons_per_setting) *
                      ps.postselection_prob;
      // Independent substreams per (run, ell, basis, port); signal and
      // nuisance use separate draws within the port stream.
      for (int port = 0; port < 2; ++port) {
        uint64_t key = SplitMix64::substream_key(
            noise.seed, noise.run_index, static_cast<uint64_t>(i),
            static_cast<uint64_t>(b), static_cast<uint64_t>(port));
        SplitMix64 rng(key);
        double mean = signal * (port == 0 ? p_plus : p_minus);
        uint64_t n = poisson_sample(rng, mean) + poisson_sample(rng, nuisance);
        if (port == 0)
          rec.counts[i][b].n_plus = n;
        else
          rec.counts[i][b].n_minus = n;
      }
    }
  }
  return rec;
}

std::vector<PauliEstimate> estimate_pauli(const CountRecord& record,
                                          const NoiseSpec& noise) {
  noise.validate();
  const double bias = noise.nuisance_mean();
  std::vector<PauliEstimate> out(record.dim());
  for (int i = 0; i < record.dim(); ++i) {
    for (int b = 0; b < 2; ++b) {
      const PortCounts& pc = record.counts[i][b];
      double np = static_cast<double>(pc.n_plus);
      double nm = static_cast<double>(pc.n_minus);
      double sp = np - bias, sm = nm - bias;
      double denom = sp + sm;
      if (denom <= 0.0)
        throw InsufficientSignalError(
            i - record.l_max, "no signal left after nuisance subtraction");
      double sigma = (sp - sm) / denom;
      // Poisson variance on each port (counts as variance estimate),
      // first-order propagation through the ratio.
      double d2 = denom * denom;
      double var = 4.0 * (sm * sm * np + sp * sp * nm) / (d2 * d2);
      double err = std::sqrt(var);
      if (b == 0) {
        out[i].sigma1 = sigma;
        out[i].sigma1_err = err;
      } else {
        out[i].sigma2 = sigma;
        out[i].sigma2_err = err;
      }
    }
  }
  return out;
}

WeakValueScan scan_from_estimates(const std::vector<PauliEstimate>& estimates,
                                  int l_max, double sin_alpha) {
  if (estimates.size() != static_cast<size_t>(2 * l_max + 1))
    throw std::domain_error("estimate count does not match 2*l_max+1");
  if (!(sin_alpha > 0.0)) throw std::domain_error("sin_alpha must be > 0");
  WeakValueScan scan;
  scan.l_max = l_max;
  scan.sin_alpha = sin_alpha;
  scan.values.resize(scan.dim());
  scan.sigma1.resize(scan.dim());
  scan.sigma2.resize(scan.dim());
  scan.uncertainties.resize(scan.dim());
  for (int i = 0; i < scan.dim(); ++i) {
    const PauliEstimate& e = estimates[i];
    scan.sigma1[i] = e.sigma1;
    scan.sigma2[i] = e.sigma2;
    scan.values[i] = Complex(e.sigma1, -e.sigma2) / sin_alpha;
    scan.uncertainties[i] = {e.sigma1_err / sin_alpha,
                             e.sigma2_err / sin_alpha};
  }
  return scan;
}

WeakValueScan average_runs(const std::vector<WeakValueScan>& scans) {
  if (scans.empty()) throw std::domain_error("average_runs needs >= 1 scan");
  const WeakValueScan& first = scans.front();
  for (const auto& s : scans)
    if (s.l_max != first.l_max)
      throw std::domain_error("scan dimensions differ");
  if (scans.size() == 1) return first;

  const double n = static_cast<double>(scans.size());
  WeakValueScan out;
  out.l_max = first.l_max;
  out.sin_alpha = first.sin_alpha;
  out.values.resize(first.dim());
  out.sigma1.resize(first.dim());
  out.sigma2.resize(first.dim());
  out.uncertainties.resize(first.dim());

  for (int i = 0; i < first.dim(); ++i) {
    double mre = 0.0, mim = 0.0, ms1 = 0.0, ms2 = 0.0;
    for (const auto& s : scans) {
      mre += s.values[i].real();
      mim += s.values[i].imag();
      ms1 += s.sigma1[i];
      ms2 += s.sigma2[i];
    }
    mre /= n;
    mim /= n;
    out.values[i] = Complex(mre, mim);
    out.sigma1[i] = ms1 / n;
    out.sigma2[i] = ms2 / n;
    double vre = 0.0, vim = 0.0;
    for (const auto& s : scans) {
      vre += (s.values[i].real() - mre) * (s.values[i].real() - mre);
      vim += (s.values[i].imag() - mim) * (s.values[i].imag() - mim);
    }
    // standard error of the mean, sample variance
    out.uncertainties[i] = {std::sqrt(vre / (n - 1.0) / n),
                            std::sqrt(vim / (n - 1.0) / n)};
  }
  return out;
}

void write_counts_csv(std::ostream& os, const CountRecord& record) {
  os << "ell,basis,n_plus,n_minus,postsel_prob\n";
  char buf[160];
  const char* names[2] = {"linear-diagonal", "circular"};
  for (int i = 0; i < record.dim(); ++i) {
    for (int b = 0; b < 2; ++b) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%llu,%llu,%.17g\n",
                    i - record.l_max, names[b],
                    static_cast<unsigned long long>(record.counts[i][b].n_plus),
                    static_cast<unsigned long long>(record.counts[i][b].n_minus),
                    record.postselection_prob[i]);
      os << buf;
    }
  }
}

void write_counts_csv_file(const std::string& path, const CountRecord& record) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_counts_csv(os, record);
}

}  // namespace oamdm
