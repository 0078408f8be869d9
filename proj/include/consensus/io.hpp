#pragma once

#include <iosfwd>
#include <string>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/protocol.hpp"
#include "consensus/types.hpp"

namespace consensus::io {

enum class GraphFormat { Auto, Matrix, EdgeList };

GraphFormat parse_graph_format(const std::string& name);

/// Decimal form that parses back to the identical double, as short as that
/// constraint allows.
std::string format_double(double v);

// Graph files carry either a dense weight matrix
//     n
//     a_00,a_01,...
// or a sparse edge list
//     edges n
//     i j weight          (0-based, i listens to j)
// Blank lines and lines starting with '#' are ignored.
WeightedDigraph<double> parse_graph(std::istream& in, const std::string& source,
                                    GraphFormat format = GraphFormat::Auto);
WeightedDigraph<double> read_graph(const std::string& path,
                                   GraphFormat format = GraphFormat::Auto);
std::string format_graph(const WeightedDigraph<double>& g);  // canonical matrix form
void write_graph(const std::string& path, const WeightedDigraph<double>& g);

/// Comma-separated doubles; `what` names the field in error messages.
Vxd parse_number_list(const std::string& text, const std::string& what);

// Protocol specs: "linear:<alpha>", "linsin:<alpha>", "piecewise",
// "table:<path>" where the file holds "w h" sample rows.
Protocol<double> parse_protocol_spec(const std::string& spec);
Protocol<double> read_table_protocol(const std::string& path);

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj);
void write_trajectory_csv(const std::string& path, const Trajectory<double>& traj);

}  // namespace consensus::io
