// Command-line front end: measure | sorter | analyze | plotdata.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "oamdm/errors.hpp"
#include "oamdm/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void print_error(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  bool noiseless = false;
};

oamdm::ExperimentConfig load_config(const CommonOpts& opts) {
  oamdm::ExperimentConfig cfg = opts.config_path.empty()
                                    ? oamdm::ExperimentConfig{}
                                    : oamdm::parse_config_file(opts.config_path);
  if (opts.seed) cfg.noise.seed = *opts.seed;
  if (!opts.out_dir.empty()) cfg.output.directory = opts.out_dir;
  cfg.validate();
  return cfg;
}

int dispatch(const std::string& command, const CommonOpts& opts) {
  oamdm::ExperimentConfig cfg = load_config(opts);
  const std::string out = cfg.output.directory;

  if (command == "measure") {
    oamdm::MeasurementBundle bundle =
        oamdm::run_direct_measurement(cfg, opts.noiseless);
    oamdm::write_bundle(bundle, out);
    std::cout << "wrote measurement bundle to " << out << "\n";
  } else if (command == "sorter") {
    oamdm::SorterReport rep = oamdm::run_sorter_characterization(cfg, out);
    std::cout << "sorter characterization: mean NN overlap "
              << rep.mean_nn_off << " (off) -> " << rep.mean_nn_on
              << " (fan-out on); wrote " << out << "\n";
  } else if (command == "analyze") {
    oamdm::MeasurementBundle bundle = oamdm::reanalyze_bundle(cfg, out);
    oamdm::write_bundle(bundle, out);
    std::cout << "re-analyzed bundle in " << out << "\n";
  } else if (command == "plotdata") {
    oamdm::emit_plot_data(out, out);
    std::cout << "wrote plot-ready panel CSVs to " << out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct-measurement simulator for high-dimensional OAM states"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string command;
  for (const char* name : {"measure", "sorter", "analyze", "plotdata"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "configuration file (INI)");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the master noise seed");
    sub->add_flag("--noiseless", opts.noiseless,
                  "skip photon-counting noise entirely");
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return dispatch(command, opts);
  } catch (const oamdm::ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const oamdm::MissingInputError& e) {
    print_error("missing-input", e.what());
    return kExitIo;
  } catch (const oamdm::SamplingError& e) {
    print_error("sampling", e.what());
    return kExitNumerical;
  } catch (const oamdm::FitFailureError& e) {
    print_error("fit-failure", e.what());
    return kExitNumerical;
  } catch (const oamdm::DegeneratePostselectionError& e) {
    print_error("degenerate-postselection", e.what());
    return kExitNumerical;
  } catch (const oamdm::InsufficientSignalError& e) {
    print_error("insufficient-signal", e.what());
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    print_error("io", e.what());
    return kExitIo;
  }
}
