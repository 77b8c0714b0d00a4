#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "oamdm/detection.hpp"
#include "oamdm/wave_optics.hpp"

namespace oamdm {

/// Full experiment configuration. Parsed from an INI-style text file
/// (sections in brackets, key = value, '#'/';' comments); unknown
/// sections or keys are rejected, and every value is validated before
/// any computation starts.
struct ExperimentConfig {
  struct State {
    double delta_theta = 2.0 * 3.14159265358979323846 / 9.0;  // aperture width
    double theta0 = 3.14159265358979323846 / 9.0;  // rotation magnitude
    int l_max = 13;
    double aberration_quad = 0.0;  // injected phase a*ell^2 (misalignment)
    double aberration_tilt = 0.0;  // injected phase b*ell
  } state;

  struct Measurement {
    double alpha = 3.14159265358979323846 / 9.0;
    int theta_index = 0;  // strong-measurement (angular position) outcome
    int runs = 50;
  } measurement;

  struct Noise {
    bool enabled = true;
    uint64_t photons_per_setting = 100000;
    double dark_rate_hz = 100.0;
    double background_rate_hz = 0.0;
    double integration_s = 1.0;
    uint64_t seed = 1;
  } noise;

  struct Sorter {
    int grid_n = 1024;
    double pitch = 10e-6;
    double wavelength = 633e-9;
    double focal_length = 0.1;
    double ring_radius = 2.5e-3;
    double ring_sigma = 0.5e-3;
    double scale_a = 0.0;  // 0 -> half-grid default
    double log_b = 0.0;    // 0 -> ring_radius
    double n_index = 1.49;
    bool fanout = true;
    int l_max = 13;
  } sorter;

  struct Output {
    std::string directory = "out";
    std::string formats = "csv,json";
  } output;

  /// Throws ConfigError (with the key path) on any out-of-domain value.
  void validate() const;

  /// Canonical INI serialization: fixed section/key order, %.17g floats.
  std::string canonical_text() const;

  /// FNV-1a hash of the canonical text, hex-encoded.
  std::string hash() const;

  GridSpec grid_spec() const;
  SorterGeometry sorter_geometry() const;
  RingSpec ring_spec() const;
  NoiseSpec noise_spec(uint64_t run_index) const;
};

/// Parse + validate. Throws ConfigError on unknown keys, syntax errors,
/// or invalid values.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace oamdm
