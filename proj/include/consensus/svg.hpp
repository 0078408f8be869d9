#pragma once

#include <string>

#include "consensus/dynamics.hpp"

namespace consensus::svg {

struct PlotOptions {
  int width = 900;
  int height = 540;
  std::string title;
};

/// Line plot of every state component against time.
std::string render_states(const Trajectory<double>& traj, const PlotOptions& opts = {});

/// Overlay of two disagreement curves on a log scale, for rate comparison.
std::string render_disagreement_pair(const Trajectory<double>& a, const std::string& label_a,
                                     const Trajectory<double>& b, const std::string& label_b,
                                     const PlotOptions& opts = {});

void write_file(const std::string& path, const std::string& content);

}  // namespace consensus::svg
