#include "oamdm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oamdm/errors.hpp"

namespace oamdm {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(d)) throw std::invalid_argument("not finite");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string lo = v;
  std::transform(lo.begin(), lo.end(), lo.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lo == "true" || lo == "1" || lo == "on" || lo == "yes") return true;
  if (lo == "false" || lo == "0" || lo == "off" || lo == "no") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(state.delta_theta > 0.0) || state.delta_theta > 2.0 * kPi)
    throw ConfigError("state.delta_theta", "must lie in (0, 2*pi]");
  if (!(state.theta0 >= 0.0) || state.theta0 >= 2.0 * kPi)
    throw ConfigError("state.theta0", "must lie in [0, 2*pi)");
  if (state.l_max < 1 || state.l_max > 64)
    throw ConfigError("state.l_max", "must lie in [1, 64]");
  if (!std::isfinite(state.aberration_quad))
    throw ConfigError("state.aberration_quad", "must be finite");
  if (!std::isfinite(state.aberration_tilt))
    throw ConfigError("state.aberration_tilt", "must be finite");

  if (!(measurement.alpha > 0.0) || measurement.alpha > kPi / 2.0)
    throw ConfigError("measurement.alpha", "must lie in (0, pi/2]");
  int d = 2 * state.l_max + 1;
  if (measurement.theta_index < 0 || measurement.theta_index >= d)
    throw ConfigError("measurement.theta_index",
                      "must lie in [0, 2*l_max] = [0, " + std::to_string(d - 1) +
                          "]");
  if (measurement.runs < 1 || measurement.runs > 100000)
    throw ConfigError("measurement.runs", "must lie in [1, 100000]");

  if (noise.photons_per_setting < 1)
    throw ConfigError("noise.photons_per_setting", "must be >= 1");
  if (!(noise.dark_rate_hz >= 0.0))
    throw ConfigError("noise.dark_rate_hz", "must be >= 0");
  if (!(noise.background_rate_hz >= 0.0))
    throw ConfigError("noise.background_rate_hz", "must be >= 0");
  if (!(noise.integration_s >= 0.0))
    throw ConfigError("noise.integration_s", "must be >= 0");

  if (sorter.grid_n < 64 || sorter.grid_n % 2 != 0 || sorter.grid_n > 8192)
    throw ConfigError("sorter.grid_n", "must be even and in [64, 8192]");
  if (!(sorter.pitch > 0.0))
    throw ConfigError("sorter.pitch", "must be > 0");
  if (!(sorter.wavelength > 0.0))
    throw ConfigError("sorter.wavelength", "must be > 0");
  if (!(sorter.focal_length > 0.0))
    throw ConfigError("sorter.focal_length", "must be > 0");
  if (!(sorter.ring_radius > 0.0))
    throw ConfigError("sorter.ring_radius", "must be > 0");
  if (!(sorter.ring_sigma > 0.0))
    throw ConfigError("sorter.ring_sigma", "must be > 0");
  if (!(sorter.scale_a >= 0.0))
    throw ConfigError("sorter.scale_a", "must be >= 0 (0 selects the default)");
  if (!(sorter.log_b >= 0.0))
    throw ConfigError("sorter.log_b", "must be >= 0 (0 selects the default)");
  if (!(sorter.n_index > 1.0 && sorter.n_index < 2.0))
    throw ConfigError("sorter.n_index", "must lie in (1, 2)");
  if (sorter.l_max < 1 || sorter.l_max > 64)
    throw ConfigError("sorter.l_max", "must lie in [1, 64]");

  if (output.directory.empty())
    throw ConfigError("output.directory", "must not be empty");
  std::stringstream ss(output.formats);
  std::string tok;
  bool any = false;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok != "csv" && tok != "json")
      throw ConfigError("output.formats",
                        "unknown format '" + tok + "' (allowed: csv, json)");
    any = true;
  }
  if (!any) throw ConfigError("output.formats", "must list at least one format");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "[state]\n"
     << "delta_theta = " << fmt(state.delta_theta) << "\n"
     << "theta0 = " << fmt(state.theta0) << "\n"
     << "l_max = " << state.l_max << "\n"
     << "aberration_quad = " << fmt(state.aberration_quad) << "\n"
     << "aberration_tilt = " << fmt(state.aberration_tilt) << "\n"
     << "\n[measurement]\n"
     << "alpha = " << fmt(measurement.alpha) << "\n"
     << "theta_index = " << measurement.theta_index << "\n"
     << "runs = " << measurement.runs << "\n"
     << "\n[noise]\n"
     << "enabled = " << (noise.enabled ? "true" : "false") << "\n"
     << "photons_per_setting = " << noise.photons_per_setting << "\n"
     << "dark_rate_hz = " << fmt(noise.dark_rate_hz) << "\n"
     << "background_rate_hz = " << fmt(noise.background_rate_hz) << "\n"
     << "integration_s = " << fmt(noise.integration_s) << "\n"
     << "seed = " << noise.seed << "\n"
     << "\n[sorter]\n"
     << "grid_n = " << sorter.grid_n << "\n"
     << "pitch = " << fmt(sorter.pitch) << "\n"
     << "wavelength = " << fmt(sorter.wavelength) << "\n"
     << "focal_length = " << fmt(sorter.focal_length) << "\n"
     << "ring_radius = " << fmt(sorter.ring_radius) << "\n"
     << "ring_sigma = " << fmt(sorter.ring_sigma) << "\n"
     << "scale_a = " << fmt(sorter.scale_a) << "\n"
     << "log_b = " << fmt(sorter.log_b) << "\n"
     << "n_index = " << fmt(sorter.n_index) << "\n"
     << "fanout = " << (sorter.fanout ? "true" : "false") << "\n"
     << "l_max = " << sorter.l_max << "\n"
     << "\n[output]\n"
     << "directory = " << output.directory << "\n"
     << "formats = " << output.formats << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  // FNV-1a, 64-bit, over the physics sections only: where the results are
  // written must not change what they are
  std::string text = canonical_text();
  size_t cut = text.rfind("\n[output]");
  if (cut != std::string::npos) text.resize(cut + 1);
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

GridSpec ExperimentConfig::grid_spec() const {
  return {sorter.grid_n, sorter.pitch, sorter.wavelength};
}

SorterGeometry ExperimentConfig::sorter_geometry() const {
  SorterGeometry g = SorterGeometry::defaults(grid_spec());
  if (sorter.scale_a > 0.0) g.a = sorter.scale_a;
  g.b = sorter.log_b > 0.0 ? sorter.log_b : sorter.ring_radius;
  g.f = sorter.focal_length;
  g.n_index = sorter.n_index;
  return g;
}

RingSpec ExperimentConfig::ring_spec() const {
  return {sorter.ring_radius, sorter.ring_sigma};
}

NoiseSpec ExperimentConfig::noise_spec(uint64_t run_index) const {
  NoiseSpec n;
  n.photons_per_setting = noise.photons_per_setting;
  n.dark_rate_hz = noise.dark_rate_hz;
  n.background_rate_hz = noise.background_rate_hz;
  n.integration_s = noise.integration_s;
  n.seed = noise.seed;
  n.run_index = run_index;
  return n;
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno),
                          "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "state" && section != "measurement" &&
          section != "noise" && section != "sorter" && section != "output")
        throw ConfigError(section, "unknown section");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno),
                        "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(key, "key appears before any [section]");
    std::string path = section + "." + key;

    if (section == "state") {
      if (key == "delta_theta") cfg.state.delta_theta = parse_double(path, val);
      else if (key == "theta0") cfg.state.theta0 = parse_double(path, val);
      else if (key == "l_max") cfg.state.l_max = parse_int(path, val);
      else if (key == "aberration_quad")
        cfg.state.aberration_quad = parse_double(path, val);
      else if (key == "aberration_tilt")
        cfg.state.aberration_tilt = parse_double(path, val);
      else throw ConfigError(path, "unknown key");
    } else if (section == "measurement") {
      if (key == "alpha") cfg.measurement.alpha = parse_double(path, val);
      else if (key == "theta_index")
        cfg.measurement.theta_index = parse_int(path, val);
      else if (key == "runs") cfg.measurement.runs = parse_int(path, val);
      else throw ConfigError(path, "unknown key");
    } else if (section == "noise") {
      if (key == "enabled") cfg.noise.enabled = parse_bool(path, val);
      else if (key == "photons_per_setting")
        cfg.noise.photons_per_setting = parse_u64(path, val);
      else if (key == "dark_rate_hz")
        cfg.noise.dark_rate_hz = parse_double(path, val);
      else if (key == "background_rate_hz")
        cfg.noise.background_rate_hz = parse_double(path, val);
      else if (key == "integration_s")
        cfg.noise.integration_s = parse_double(path, val);
      else if (key == "seed") cfg.noise.seed = parse_u64(path, val);
      else throw ConfigError(path, "unknown key");
    } else if (section == "sorter") {
      if (key == "grid_n") cfg.sorter.grid_n = parse_int(path, val);
      else if (key == "pitch") cfg.sorter.pitch = parse_double(path, val);
      else if (key == "wavelength")
        cfg.sorter.wavelength = parse_double(path, val);
      else if (key == "focal_length")
        cfg.sorter.focal_length = parse_double(path, val);
      else if (key == "ring_radius")
        cfg.sorter.ring_radius = parse_double(path, val);
      else if (key == "ring_sigma")
        cfg.sorter.ring_sigma = parse_double(path, val);
      else if (key == "scale_a") cfg.sorter.scale_a = parse_double(path, val);
      else if (key == "log_b") cfg.sorter.log_b = parse_double(path, val);
      else if (key == "n_index") cfg.sorter.n_index = parse_double(path, val);
      else if (key == "fanout") cfg.sorter.fanout = parse_bool(path, val);
      else if (key == "l_max") cfg.sorter.l_max = parse_int(path, val);
      else throw ConfigError(path, "unknown key");
    } else {  // output
      if (key == "directory") cfg.output.directory = val;
      else if (key == "formats") cfg.output.formats = val;
      else throw ConfigError(path, "unknown key");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("cannot open config file: " + path);
  return parse_config(is);
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace oamdm
