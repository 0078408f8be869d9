#pragma once

#include <iosfwd>
#include <string>

#include "consensus/dynamics.hpp"
#include "consensus/io.hpp"
#include "consensus/types.hpp"

namespace consensus {

// Process exit codes shared by the command-line front end and its tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;  // parse, config, or certification failure
inline constexpr int kExitNotStronglyConnected = 2;
inline constexpr int kExitTimeLimit = 3;
inline constexpr int kExitDivergence = 4;
inline constexpr int kExitIncomparable = 5;

/// Everything one simulation run needs. Collected from a config file, then
/// optionally overridden key by key from the command line.
struct ExperimentConfig {
  std::string graph_path;
  io::GraphFormat graph_format = io::GraphFormat::Auto;
  std::string protocol_spec;
  Vxd x0;
  SimulationConfig<double> sim;
  bool certified = true;
  bool plot = false;
  std::string out_dir = "out";
};

/// Applies one "key = value" assignment. Relative paths in path-valued keys
/// resolve against base_dir when it is non-empty.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& base_dir = "");

/// Reads a flat key=value file ('#' comments, blank lines ignored). Relative
/// paths inside resolve against the config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);

int run_check_graph(const std::string& graph_path, io::GraphFormat format,
                    const std::string& export_path, std::ostream& out, std::ostream& err);
int run_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int run_compare(const ExperimentConfig& first, const ExperimentConfig& second, double eps,
                const std::string& out_dir, bool plot, std::ostream& out, std::ostream& err);

}  // namespace consensus
