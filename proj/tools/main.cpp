#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "consensus/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using consensus::ExperimentConfig;

std::string preset_dir() {
  if (const char* env = std::getenv("CONSENSUS_PRESET_DIR")) return env;
#ifdef CONSENSUS_PRESET_DIR
  return CONSENSUS_PRESET_DIR;
#else
  return "presets";
#endif
}

std::string preset_path(const std::string& name) {
  const fs::path path = fs::path(preset_dir()) / (name + ".cfg");
  if (!fs::exists(path)) {
    std::string available;
    if (fs::is_directory(preset_dir()))
      for (const auto& entry : fs::directory_iterator(preset_dir()))
        if (entry.path().extension() == ".cfg")
          available += " " + entry.path().stem().string();
    throw consensus::ConfigError("unknown preset '" + name + "'; available:" +
                                 (available.empty() ? " (none)" : available));
  }
  return path.string();
}

// Values arrive as raw strings so the shared key=value machinery applies the
// same validation to flags and config files.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pairs;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& help) {
    cmd->add_option_function<std::string>(
           flag, [this, key](const std::string& value) { pairs.emplace_back(key, value); },
           help)
        ->type_name("TEXT");
  }

  void apply(ExperimentConfig& cfg) const {
    for (const auto& [key, value] : pairs) consensus::set_config_value(cfg, key, value);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate nonlinear consensus protocols on weighted digraphs and certify the runs"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check-graph", "report the connectivity structure of a graph file");
  std::string check_path, check_format = "auto", check_export;
  check->add_option("graph", check_path, "graph file (matrix or edge list)")->required();
  check->add_option("--format", check_format, "force a format: auto, matrix, edges")
      ->capture_default_str();
  check->add_option("--export", check_export, "also write the graph in canonical matrix form");

  auto* sim = app.add_subcommand("simulate", "integrate the consensus flow and write run records");
  std::string sim_config, sim_preset;
  bool sim_unchecked = false, sim_plot = false;
  sim->add_option("--config", sim_config, "key=value run configuration file");
  sim->add_option("--preset", sim_preset, "bundled configuration name");
  Overrides sim_over;
  sim_over.add(sim, "--graph", "graph", "graph file");
  sim_over.add(sim, "--format", "format", "graph file format: auto, matrix, edges");
  sim_over.add(sim, "--protocol", "protocol", "linear:<a>, linsin:<a>, piecewise, or table:<path>");
  sim_over.add(sim, "--x0", "x0", "comma-separated initial state");
  sim_over.add(sim, "--dt", "dt", "integration step");
  sim_over.add(sim, "--t-max", "t_max", "time horizon");
  sim_over.add(sim, "--consensus-tol", "consensus_tol", "disagreement level declaring consensus");
  sim_over.add(sim, "--record-every", "record_every", "steps between retained samples");
  sim_over.add(sim, "--integrator", "integrator", "rk4 or euler");
  sim_over.add(sim, "--out", "out", "output directory");
  sim->add_flag("--unchecked", sim_unchecked, "skip the strong-connectivity requirement");
  sim->add_flag("--plot", sim_plot, "write an SVG of the state trajectories");

  auto* cmp = app.add_subcommand("compare", "race two configurations to a disagreement threshold");
  std::vector<std::string> cmp_configs;
  std::string cmp_preset, cmp_out = "out";
  double cmp_eps = 1e-3;
  bool cmp_plot = false;
  cmp->add_option("configs", cmp_configs, "two run configuration files")->expected(0, 2);
  cmp->add_option("--preset", cmp_preset, "bundled comparison name");
  cmp->add_option("--eps", cmp_eps, "disagreement threshold")->capture_default_str();
  cmp->add_option("--out", cmp_out, "output directory")->capture_default_str();
  cmp->add_flag("--plot", cmp_plot, "write an SVG overlay of the disagreement curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? consensus::kExitOk : consensus::kExitError;
  }

  try {
    if (check->parsed())
      return consensus::run_check_graph(check_path, consensus::io::parse_graph_format(check_format),
                                        check_export, std::cout, std::cerr);

    if (sim->parsed()) {
      ExperimentConfig cfg;
      if (!sim_config.empty() && !sim_preset.empty())
        throw consensus::ConfigError("give either --config or --preset, not both");
      if (!sim_config.empty()) cfg = consensus::load_experiment_config(sim_config);
      if (!sim_preset.empty()) cfg = consensus::load_experiment_config(preset_path(sim_preset));
      sim_over.apply(cfg);
      if (sim_unchecked) cfg.certified = false;
      if (sim_plot) cfg.plot = true;
      return consensus::run_simulate(cfg, std::cout, std::cerr);
    }

    // compare
    std::vector<std::string> paths = cmp_configs;
    if (!cmp_preset.empty()) {
      if (!paths.empty())
        throw consensus::ConfigError("give either two config files or --preset, not both");
      paths = {preset_path(cmp_preset + "_nonlinear"), preset_path(cmp_preset + "_linear")};
    }
    if (paths.size() != 2)
      throw consensus::ConfigError("compare needs two run configurations");
    return consensus::run_compare(consensus::load_experiment_config(paths[0]),
                                  consensus::load_experiment_config(paths[1]), cmp_eps, cmp_out,
                                  cmp_plot, std::cout, std::cerr);
  } catch (const consensus::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return consensus::kExitError;
  }
}
