#include "oamdm/rng.hpp"

#include <numbers>
#include <stdexcept>

namespace oamdm {

namespace {

// Single-uniform CDF inversion; monotone in the mean for a fixed stream,
// which keeps reported noise monotone when only a rate parameter grows.
uint64_t poisson_inversion(SplitMix64& rng, double mean) {
  double u = rng.next_double();
  double p = std::exp(-mean);
  double cum = p;
  uint64_t k = 0;
  while (u > cum) {
    ++k;
    p *= mean / static_cast<double>(k);
    cum += p;
    if (k > 2000) break;  // guards against pathological rounding
  }
  return k;
}

// Hormann's PTRD transformed rejection, valid for mean >= 10.
uint64_t poisson_ptrd(SplitMix64& rng, double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mean);

  for (int iter = 0; iter < 10000; ++iter) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kf;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = k * log_mu - mean - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<uint64_t>(kf);
  }
  throw std::runtime_error("poisson_ptrd failed to converge");
}

}  // namespace

uint64_t poisson_sample(SplitMix64& rng, double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 700.0) return poisson_inversion(rng, mean);
  return poisson_ptrd(rng, mean);
}

double normal_sample(SplitMix64& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace oamdm
