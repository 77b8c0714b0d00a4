#include "oamdm/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "oamdm/detection.hpp"
#include "oamdm/errors.hpp"

namespace oamdm {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x <= 0.0) x += 2.0 * kPi;
  return x - kPi;
}

OamState prepared_state(const ExperimentConfig& cfg) {
  return aperture_state(cfg.state.delta_theta, cfg.state.l_max).gauge_fixed();
}

// Optional misalignment systematics. Re-pointing the rotated aperture
// pattern perturbs the alignment in proportion to the rotation, so the
// injected defocus/tilt phase is scaled by the setting's rotation sign
// (0 for the unrotated reference); this leaves the aberration visible in
// the phase differences, as in the hardware.
OamState inject_aberrations(const ExperimentConfig& cfg, const OamState& state,
                            double setting_sign) {
  if ((cfg.state.aberration_quad == 0.0 && cfg.state.aberration_tilt == 0.0) ||
      setting_sign == 0.0)
    return state;
  std::vector<Complex> amps = state.amplitudes();
  for (int i = 0; i < state.dim(); ++i) {
    double ell = i - state.l_max();
    amps[i] *= std::exp(
        Complex(0.0, setting_sign * (cfg.state.aberration_quad * ell * ell +
                                     cfg.state.aberration_tilt * ell)));
  }
  return OamState(amps, state.l_max());
}

WeakValueScan measure_setting(const ExperimentConfig& cfg,
                              const OamState& state, bool noiseless,
                              int setting_slot) {
  const double alpha = cfg.measurement.alpha;
  const int theta_index = cfg.measurement.theta_index;
  if (noiseless || !cfg.noise.enabled)
    return direct_measure(state, alpha, theta_index);

  const int l_max = state.l_max();
  std::vector<PointerState> pointers;
  pointers.reserve(state.dim());
  for (int ell = -l_max; ell <= l_max; ++ell)
    pointers.push_back(
        weak_then_strong(state, CouplingSpec{alpha, ell}, theta_index));

  std::vector<WeakValueScan> runs;
  runs.reserve(cfg.measurement.runs);
  for (int r = 0; r < cfg.measurement.runs; ++r) {
    NoiseSpec noise = cfg.noise_spec(
        static_cast<uint64_t>(setting_slot) * 1000000ull + r);
    CountRecord counts = simulate_counts(pointers, l_max, noise);
    runs.push_back(scan_from_estimates(estimate_pauli(counts, noise), l_max,
                                       std::sin(alpha)));
  }
  return average_runs(runs);
}

// Analysis stage shared by the live pipeline and `analyze` re-runs.
// Weighting follows the data: all-positive uncertainties enable the
// chi-square weights, otherwise fits fall back to unweighted.
void analyze_bundle(MeasurementBundle& b) {
  b.recon_zero = renormalize_scan(b.scan_zero);
  b.recon_plus = renormalize_scan(b.scan_plus);
  b.recon_minus = renormalize_scan(b.scan_minus);

  const int d = b.recon_zero.dim();
  auto has_errors = [](const ReconstructedState& r) {
    for (double e : r.prob_err)
      if (!(e > 0.0)) return false;
    return true;
  };
  bool weighted = has_errors(b.recon_zero);

  b.delta_phi_plus.resize(d);
  b.delta_phi_minus.resize(d);
  b.delta_phi_plus_err.resize(d);
  b.delta_phi_minus_err.resize(d);
  for (int i = 0; i < d; ++i) {
    b.delta_phi_plus[i] = wrap_pi(b.recon_plus.phase[i] - b.recon_zero.phase[i]);
    b.delta_phi_minus[i] =
        wrap_pi(b.recon_minus.phase[i] - b.recon_zero.phase[i]);
    b.delta_phi_plus_err[i] = std::hypot(b.recon_plus.phase_err[i],
                                         b.recon_zero.phase_err[i]);
    b.delta_phi_minus_err[i] = std::hypot(b.recon_minus.phase_err[i],
                                          b.recon_zero.phase_err[i]);
  }

  std::vector<int> ells(d);
  for (int i = 0; i < d; ++i) ells[i] = i - b.recon_zero.l_max();

  b.mask = amplitude_mask(b.recon_zero);
  b.pi_jumps = detect_pi_jumps(b.recon_zero);
  b.sinc_fit = fit_sinc_squared(
      ells, b.recon_zero.prob_density,
      weighted ? b.recon_zero.prob_err : std::vector<double>{});
  b.quad_fit = fit_phase_quadratic(
      ells, b.recon_zero.phase,
      weighted ? b.recon_zero.phase_err : std::vector<double>{}, b.mask);
  b.slope_plus_fit = fit_phase_linear_chi2(
      ells, b.delta_phi_plus,
      weighted ? b.delta_phi_plus_err : std::vector<double>{}, b.mask);
  b.slope_minus_fit = fit_phase_linear_chi2(
      ells, b.delta_phi_minus,
      weighted ? b.delta_phi_minus_err : std::vector<double>{}, b.mask);
  b.fidelity_with_truth = fidelity(b.recon_zero.state, b.true_state);
}

nlohmann::json fit_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.model;
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : fit.params)
    params[p.name] = {{"value", p.value}, {"err", p.err}};
  j["params"] = params;
  return j;
}

}  // namespace

MeasurementBundle run_direct_measurement(const ExperimentConfig& config,
                                         bool noiseless) {
  config.validate();
  MeasurementBundle b;
  b.config = config;
  b.noiseless = noiseless || !config.noise.enabled;
  b.true_state = prepared_state(config);

  const double t0 = config.state.theta0;
  b.scan_zero = measure_setting(config, b.true_state, b.noiseless, 0);
  b.scan_plus = measure_setting(
      config, inject_aberrations(config, rotate_state(b.true_state, t0), 1.0),
      b.noiseless, 1);
  b.scan_minus = measure_setting(
      config, inject_aberrations(config, rotate_state(b.true_state, -t0), -1.0),
      b.noiseless, 2);
  analyze_bundle(b);
  return b;
}

void write_bundle(const MeasurementBundle& b, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const std::string& name) { return out_dir + "/" + name; };

  write_scan_csv_file(path("scan_zero.csv"), b.scan_zero);
  write_scan_csv_file(path("scan_plus.csv"), b.scan_plus);
  write_scan_csv_file(path("scan_minus.csv"), b.scan_minus);
  write_state_csv_file(path("true_state.csv"), b.true_state);
  write_reconstruction_csv_file(path("recon_zero.csv"), b.recon_zero);
  write_reconstruction_csv_file(path("recon_plus.csv"), b.recon_plus);
  write_reconstruction_csv_file(path("recon_minus.csv"), b.recon_minus);

  {
    std::ofstream os(path("delta_phi.csv"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open delta_phi.csv for writing");
    os << "ell,dphi_plus,dphi_plus_err,dphi_minus,dphi_minus_err\n";
    char buf[160];
    for (int i = 0; i < b.recon_zero.dim(); ++i) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                    i - b.recon_zero.l_max(), b.delta_phi_plus[i],
                    b.delta_phi_plus_err[i], b.delta_phi_minus[i],
                    b.delta_phi_minus_err[i]);
      os << buf;
    }
  }

  nlohmann::json fits;
  fits["sinc"] = fit_json(b.sinc_fit);
  fits["quadratic"] = fit_json(b.quad_fit);
  fits["slope_plus"] = fit_json(b.slope_plus_fit);
  fits["slope_minus"] = fit_json(b.slope_minus_fit);
  fits["pi_jumps"] = std::vector<int>(b.pi_jumps.begin(), b.pi_jumps.end());
  fits["mask"] = std::vector<int>(b.mask.begin(), b.mask.end());
  fits["fidelity"] = b.fidelity_with_truth;
  fits["noiseless"] = b.noiseless;
  {
    std::ofstream os(path("fits.json"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open fits.json for writing");
    os << fits.dump(2) << "\n";
  }

  {
    std::ofstream os(path("resolved_config.ini"), std::ios::binary);
    if (!os)
      throw std::runtime_error("cannot open resolved_config.ini for writing");
    os << b.config.canonical_text();
  }

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["config_hash"] = b.config.hash();
  manifest["seed"] = b.config.noise.seed;
  manifest["noiseless"] = b.noiseless;
  manifest["config_file"] = "resolved_config.ini";
  manifest["files"] = {"scan_zero.csv",  "scan_plus.csv",  "scan_minus.csv",
                       "true_state.csv", "recon_zero.csv", "recon_plus.csv",
                       "recon_minus.csv", "delta_phi.csv",  "fits.json"};
  {
    std::ofstream os(path("manifest.json"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open manifest.json for writing");
    os << manifest.dump(2) << "\n";
  }

  {
    std::ofstream os(path("run.log"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open run.log for writing");
    os << "direct measurement pipeline\n"
       << "config_hash=" << b.config.hash() << "\n"
       << "noiseless=" << (b.noiseless ? "true" : "false") << "\n"
       << "runs=" << b.config.measurement.runs << "\n"
       << "delta_ell=" << b.sinc_fit.param("delta_ell").value << " +/- "
       << b.sinc_fit.param("delta_ell").err << "\n"
       << "slope_plus=" << b.slope_plus_fit.param("slope").value << "\n"
       << "slope_minus=" << b.slope_minus_fit.param("slope").value << "\n"
       << "fidelity=" << b.fidelity_with_truth << "\n";
  }
}

MeasurementBundle reanalyze_bundle(const ExperimentConfig& config,
                                   const std::string& dir) {
  namespace fs = std::filesystem;
  auto need = [&](const std::string& name) {
    std::string p = dir + "/" + name;
    if (!fs::exists(p)) throw MissingInputError("missing bundle file: " + p);
    return p;
  };
  MeasurementBundle b;
  b.config = config;
  b.scan_zero = read_scan_csv_file(need("scan_zero.csv"));
  b.scan_plus = read_scan_csv_file(need("scan_plus.csv"));
  b.scan_minus = read_scan_csv_file(need("scan_minus.csv"));
  b.true_state = read_state_csv_file(need("true_state.csv"));
  bool all_zero_err = true;
  for (const auto& [er, ei] : b.scan_zero.uncertainties)
    if (er > 0.0 || ei > 0.0) all_zero_err = false;
  b.noiseless = all_zero_err;
  analyze_bundle(b);
  return b;
}

namespace {

struct TableFile {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

TableFile read_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("missing bundle file: " + path);
  TableFile t;
  std::string line;
  if (!std::getline(is, line))
    throw MissingInputError("empty bundle file: " + path);
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) t.header.push_back(tok);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, tok, ',')) row.push_back(std::stod(tok));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_panel(const std::string& path,
                 const std::vector<std::tuple<double, double, double,
                                              std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "x,y,yerr,series\n";
  char buf[160];
  for (const auto& [x, y, yerr, series] : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%s\n", x, y, yerr,
                  series.c_str());
    os << buf;
  }
}

}  // namespace

void emit_plot_data(const std::string& bundle_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  using Row = std::tuple<double, double, double, std::string>;

  // fig2a: raw weak values, two series (re, im)
  {
    TableFile scan = read_table(bundle_dir + "/scan_zero.csv");
    std::vector<Row> rows;
    for (const auto& r : scan.rows)
      rows.emplace_back(r[0], r[1], r[5], "re");
    for (const auto& r : scan.rows)
      rows.emplace_back(r[0], r[2], r[6], "im");
    write_panel(out_dir + "/fig2a.csv", rows);
  }

  auto recon_panels = [&](const std::string& csv, const std::string& dens_file,
                          const std::string& dens_series,
                          const std::string& phase_file,
                          const std::string& phase_series) {
    TableFile t = read_table(bundle_dir + "/" + csv);
    std::vector<Row> dens, phase;
    for (const auto& r : t.rows) {
      dens.emplace_back(r[0], r[1], r[2], dens_series);
      phase.emplace_back(r[0], r[3], r[4], phase_series);
    }
    write_panel(out_dir + "/" + dens_file, dens);
    write_panel(out_dir + "/" + phase_file, phase);
  };
  recon_panels("recon_zero.csv", "fig2b.csv", "prob", "fig2c.csv", "phase");
  recon_panels("recon_plus.csv", "fig3a.csv", "prob_plus", "fig3b.csv",
               "phase_plus");
  recon_panels("recon_minus.csv", "fig3d.csv", "prob_minus", "fig3e.csv",
               "phase_minus");

  {
    TableFile t = read_table(bundle_dir + "/delta_phi.csv");
    std::vector<Row> plus, minus;
    for (const auto& r : t.rows) {
      plus.emplace_back(r[0], r[1], r[2], "dphi_plus");
      minus.emplace_back(r[0], r[3], r[4], "dphi_minus");
    }
    write_panel(out_dir + "/fig3c.csv", plus);
    write_panel(out_dir + "/fig3f.csv", minus);
  }
}

SorterReport run_sorter_characterization(const ExperimentConfig& config,
                                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(out_dir);

  GridSpec grid = config.grid_spec();
  SorterGeometry geom = config.sorter_geometry();
  RingSpec ring = config.ring_spec();
  const int l_max = config.sorter.l_max;

  std::vector<ScalarField> strips;
  strips.reserve(2 * l_max + 1);
  for (int ell = -l_max; ell <= l_max; ++ell)
    strips.push_back(sorter_strip(ell, geom, ring, grid));

  SorterReport rep;
  rep.fanout = design_fanout(3, 0.02);
  rep.without_fanout =
      crosstalk_from_strips(strips, geom, std::nullopt, l_max);
  rep.with_fanout = crosstalk_from_strips(strips, geom, rep.fanout, l_max);
  rep.mean_nn_off = rep.without_fanout.mean_nearest_neighbor();
  rep.mean_nn_on = rep.with_fanout.mean_nearest_neighbor();
  rep.diagonal_dominant = true;
  for (int ell = -l_max; ell <= l_max && rep.diagonal_dominant; ++ell) {
    for (int lp = -l_max; lp <= l_max; ++lp) {
      if (lp == ell) continue;
      if (rep.without_fanout.at(ell, lp) >= rep.without_fanout.at(ell, ell) ||
          rep.with_fanout.at(ell, lp) >= rep.with_fanout.at(ell, ell)) {
        rep.diagonal_dominant = false;
        break;
      }
    }
  }

  write_crosstalk_csv_file(out_dir + "/crosstalk_off.csv", rep.without_fanout);
  write_crosstalk_csv_file(out_dir + "/crosstalk_on.csv", rep.with_fanout);
  write_phase_mask(out_dir + "/mask_r1.f32", element_phase_r1(geom, grid),
                   grid, "log-polar unwrapper element R1 phase (radians)");
  write_phase_mask(out_dir + "/mask_r2.f32", element_phase_r2(geom, grid),
                   grid, "log-polar corrector element R2 phase (radians)");

  nlohmann::json j;
  j["config_hash"] = config.hash();
  j["mean_nn_off"] = rep.mean_nn_off;
  j["mean_nn_on"] = rep.mean_nn_on;
  j["mean_diag_off"] = rep.without_fanout.mean_diagonal();
  j["mean_diag_on"] = rep.with_fanout.mean_diagonal();
  j["reduction_ratio"] =
      rep.mean_nn_off > 0.0 ? rep.mean_nn_on / rep.mean_nn_off : 0.0;
  j["diagonal_dominant"] = rep.diagonal_dominant;
  j["fanout"] = {{"copies", rep.fanout.copies},
                 {"efficiency", rep.fanout.efficiency},
                 {"uniformity", rep.fanout.uniformity},
                 {"converged", rep.fanout.converged},
                 {"phase_coeffs", rep.fanout.phase_coeffs}};
  std::ofstream os(out_dir + "/sorter_summary.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot open sorter_summary.json");
  os << j.dump(2) << "\n";
  return rep;
}

}  // namespace oamdm
