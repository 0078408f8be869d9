#include "consensus/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "consensus/analysis.hpp"
#include "consensus/graph.hpp"
#include "consensus/svg.hpp"

namespace consensus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

// Table-backed protocol specs carry a file path after the colon; everything
// else is self-contained.
std::string resolve_protocol_spec(const std::string& base_dir, const std::string& spec) {
  if (spec.rfind("table:", 0) != 0) return spec;
  return "table:" + resolve(base_dir, spec.substr(6));
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

double parse_positive(const std::string& value, const std::string& key) {
  const Vxd v = io::parse_number_list(value, "config key '" + key + "'");
  if (v.size() != 1 || !(v(0) > 0))
    throw ConfigError("config key '" + key + "': expected one positive number");
  return v(0);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::ConsensusReached: return "consensus";
    case Termination::TimeLimit: return "time_limit";
    case Termination::Divergence: return "divergence";
  }
  return "unknown";
}

const char* ordering_name(RateOrdering o) {
  switch (o) {
    case RateOrdering::FirstFaster: return "first_faster";
    case RateOrdering::SecondFaster: return "second_faster";
    case RateOrdering::Tie: return "tie";
  }
  return "unknown";
}

// Console text rounds to six significant digits; the files keep every bit.
std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json json_or_null(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

// Largest per-component wobble over the final tenth of the samples; small
// values mean the run settled, whether or not it reached consensus.
double tail_oscillation(const Trajectory<double>& traj) {
  const size_t count = traj.samples.size();
  const size_t start = count - std::max<size_t>(count / 10, std::min<size_t>(count, 2));
  const Eigen::Index n = traj.samples.front().x.size();
  double worst = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = traj.samples[start].x(i), hi = lo;
    for (size_t k = start; k < count; ++k) {
      lo = std::min(lo, traj.samples[k].x(i));
      hi = std::max(hi, traj.samples[k].x(i));
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

int exit_code_for(Termination t) {
  switch (t) {
    case Termination::ConsensusReached: return kExitOk;
    case Termination::TimeLimit: return kExitTimeLimit;
    case Termination::Divergence: return kExitDivergence;
  }
  return kExitError;
}

void require_complete(const ExperimentConfig& cfg) {
  if (cfg.graph_path.empty()) throw ConfigError("no graph file configured");
  if (cfg.protocol_spec.empty()) throw ConfigError("no protocol configured");
  if (cfg.x0.size() == 0) throw ConfigError("no initial state configured");
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& base_dir) {
  if (key == "graph") {
    cfg.graph_path = resolve(base_dir, value);
  } else if (key == "format") {
    cfg.graph_format = io::parse_graph_format(value);
  } else if (key == "protocol") {
    cfg.protocol_spec = resolve_protocol_spec(base_dir, value);
  } else if (key == "x0") {
    cfg.x0 = io::parse_number_list(value, "config key 'x0'");
  } else if (key == "dt") {
    cfg.sim.dt = parse_positive(value, key);
  } else if (key == "t_max") {
    cfg.sim.t_max = parse_positive(value, key);
  } else if (key == "consensus_tol") {
    cfg.sim.consensus_tol = parse_positive(value, key);
  } else if (key == "record_every") {
    const double v = parse_positive(value, key);
    if (v != std::floor(v)) throw ConfigError("config key 'record_every': expected an integer");
    cfg.sim.record_every = static_cast<long>(v);
  } else if (key == "integrator") {
    if (value == "rk4") cfg.sim.integrator = Integrator::RK4;
    else if (value == "euler") cfg.sim.integrator = Integrator::Euler;
    else throw ConfigError("config key 'integrator': expected rk4 or euler");
  } else if (key == "mode") {
    if (value == "certified") cfg.certified = true;
    else if (value == "unchecked") cfg.certified = false;
    else throw ConfigError("config key 'mode': expected certified or unchecked");
  } else if (key == "plot") {
    cfg.plot = parse_bool(value, key);
  } else if (key == "out") {
    cfg.out_dir = resolve(base_dir, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  const std::string base_dir = fs::path(path).parent_path().string();

  ExperimentConfig cfg;
  std::string raw;
  long number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const Error& e) {
      throw ConfigError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

int run_check_graph(const std::string& graph_path, io::GraphFormat format,
                    const std::string& export_path, std::ostream& out, std::ostream& err) {
  try {
    const WeightedDigraph<double> g = io::read_graph(graph_path, format);
    if (!export_path.empty()) io::write_graph(export_path, g);
    const ConnectivityReport report = connectivity(g);
    if (report.strongly_connected) {
      const LeftEigenvector<double> xi = left_eigenvector(build_laplacian(g));
      out << "strongly connected; " << report.scc_count << " component; xi =";
      for (Eigen::Index i = 0; i < xi.size(); ++i) out << " " << compact(xi.xi(i));
      out << "\n";
      return kExitOk;
    }
    out << "not strongly connected; " << report.scc_count << " components; spanning tree: "
        << (report.has_spanning_tree ? "yes" : "no");
    if (report.has_spanning_tree) {
      out << (report.root_candidates.size() == 1 ? "; root: node" : "; root candidates: nodes");
      for (const int r : report.root_candidates) out << " " << r;
    }
    out << "\n";
    return kExitNotStronglyConnected;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

namespace {

struct RunArtifacts {
  Trajectory<double> trajectory;
  Protocol<double> protocol;
  MonotonicityReport<double> monotonicity;
  std::optional<AnalysisReport<double>> analysis;
  Eigen::Index n = 0;
};

// Monotonicity is screened over the padded hull of the initial state, the
// region a trajectory driven toward agreement can plausibly visit.
MonotonicityReport<double> screen_protocol(const Protocol<double>& p, const Vxd& x0) {
  const double lo = x0.minCoeff(), hi = x0.maxCoeff();
  const double pad = hi > lo ? 0.1 * (hi - lo) : 1.0;
  return check_monotone(p, lo - pad, hi + pad);
}

RunArtifacts execute(const ExperimentConfig& cfg) {
  require_complete(cfg);
  const WeightedDigraph<double> g = io::read_graph(cfg.graph_path, cfg.graph_format);
  RunArtifacts run{Trajectory<double>{}, io::parse_protocol_spec(cfg.protocol_spec),
                   MonotonicityReport<double>{}, std::nullopt, g.size()};
  run.monotonicity = screen_protocol(run.protocol, cfg.x0);
  run.trajectory = simulate(g, run.protocol, cfg.x0, cfg.sim, cfg.certified);
  if (connectivity(g).strongly_connected) {
    const Laplacian<double> lap = build_laplacian(g);
    run.analysis = analyze(run.trajectory, left_eigenvector(lap), lap, run.protocol);
  }
  return run;
}

json summary_json(const ExperimentConfig& cfg, const RunArtifacts& run) {
  const Trajectory<double>& traj = run.trajectory;
  json j;
  j["consensus_time"] = run.analysis ? json_or_null(run.analysis->consensus_time) : json(nullptr);
  j["consensus_tol"] = cfg.sim.consensus_tol;
  j["conservation_drift"] =
      run.analysis ? json(run.analysis->max_conservation_drift) : json(nullptr);
  j["decision_value"] = json_or_null(traj.decision_value);
  j["dt"] = cfg.sim.dt;
  j["estimated_sector_bound"] = run.monotonicity.estimated_sector_bound;
  j["final_disagreement"] = traj.back().disagreement;
  j["final_time"] = traj.back().t;
  j["first_v_violation_time"] =
      run.analysis ? json_or_null(run.analysis->first_v_violation_time) : json(nullptr);
  j["fitted_decay_rate"] =
      run.analysis ? json_or_null(run.analysis->fitted_decay_rate) : json(nullptr);
  j["graph"] = cfg.graph_path;
  j["integrator"] = cfg.sim.integrator == Integrator::RK4 ? "rk4" : "euler";
  j["mode"] = cfg.certified ? "certified" : "unchecked";
  j["n"] = static_cast<long>(run.n);
  j["protocol"] = run.protocol.label();
  j["protocol_monotone_on_range"] = run.monotonicity.monotone_on_range;
  j["record_every"] = cfg.sim.record_every;
  j["samples"] = traj.samples.size();
  j["sos_residual"] = run.analysis ? json(run.analysis->sos_residual) : json(nullptr);
  j["t_max"] = cfg.sim.t_max;
  j["tail_oscillation"] = tail_oscillation(traj);
  j["terminated_by"] = termination_name(traj.terminated_by);
  j["v_monotone"] = run.analysis ? json(run.analysis->v_monotone) : json(nullptr);
  return j;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void describe(const Trajectory<double>& traj, std::ostream& out) {
  switch (traj.terminated_by) {
    case Termination::ConsensusReached:
      out << "consensus reached at t = " << compact(traj.back().t) << "; decision value "
          << compact(*traj.decision_value) << "\n";
      break;
    case Termination::TimeLimit:
      out << "time limit reached at t = " << compact(traj.back().t)
          << "; final disagreement " << compact(traj.back().disagreement) << "\n";
      break;
    case Termination::Divergence:
      out << "divergence detected at t = " << compact(traj.back().t) << "\n";
      break;
  }
}

}  // namespace

int run_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const RunArtifacts run = execute(cfg);
    fs::create_directories(cfg.out_dir);
    io::write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(),
                             run.trajectory);
    write_text(fs::path(cfg.out_dir) / "summary.json", summary_json(cfg, run).dump(2) + "\n");
    if (cfg.plot) {
      svg::PlotOptions opts;
      opts.title = run.protocol.label();
      svg::write_file((fs::path(cfg.out_dir) / "trajectory.svg").string(),
                      svg::render_states(run.trajectory, opts));
    }
    if (!run.monotonicity.monotone_on_range)
      out << "warning: protocol is not monotone on the sampled range\n";
    describe(run.trajectory, out);
    return exit_code_for(run.trajectory.terminated_by);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_compare(const ExperimentConfig& first, const ExperimentConfig& second, double eps,
                const std::string& out_dir, bool plot, std::ostream& out, std::ostream& err) {
  try {
    require_complete(first);
    require_complete(second);
    const WeightedDigraph<double> ga = io::read_graph(first.graph_path, first.graph_format);
    const WeightedDigraph<double> gb = io::read_graph(second.graph_path, second.graph_format);
    if (ga.size() != gb.size() || !(ga.weights.array() == gb.weights.array()).all())
      throw ConfigError("compare: runs must share the same graph");
    if (first.x0.size() != second.x0.size() ||
        !(first.x0.array() == second.x0.array()).all())
      throw ConfigError("compare: runs must share the same initial state");

    const Protocol<double> pa = io::parse_protocol_spec(first.protocol_spec);
    const Protocol<double> pb = io::parse_protocol_spec(second.protocol_spec);
    const Trajectory<double> ta = simulate(ga, pa, first.x0, first.sim, first.certified);
    const Trajectory<double> tb = simulate(gb, pb, second.x0, second.sim, second.certified);
    const RateComparison<double> cmp = compare_rates(ta, tb, eps);

    fs::create_directories(out_dir);
    io::write_trajectory_csv((fs::path(out_dir) / "trajectory_first.csv").string(), ta);
    io::write_trajectory_csv((fs::path(out_dir) / "trajectory_second.csv").string(), tb);
    json j;
    j["crossing_first"] = json_or_null(cmp.crossing_first);
    j["crossing_second"] = json_or_null(cmp.crossing_second);
    j["ordering"] = ordering_name(cmp.ordering);
    j["protocol_first"] = pa.label();
    j["protocol_second"] = pb.label();
    j["rate_first"] = json_or_null(cmp.rate_first);
    j["rate_second"] = json_or_null(cmp.rate_second);
    j["threshold"] = eps;
    write_text(fs::path(out_dir) / "compare.json", j.dump(2) + "\n");
    if (plot) {
      svg::PlotOptions opts;
      opts.title = "disagreement decay";
      svg::write_file((fs::path(out_dir) / "compare.svg").string(),
                      svg::render_disagreement_pair(ta, pa.label(), tb, pb.label(), opts));
    }

    auto crossing_text = [eps](const std::optional<double>& t) {
      return t ? "reaches " + compact(eps) + " at t = " + compact(*t)
               : "never reaches " + compact(eps);
    };
    out << "first (" << pa.label() << ") " << crossing_text(cmp.crossing_first) << "; second ("
        << pb.label() << ") " << crossing_text(cmp.crossing_second) << "\n";
    switch (cmp.ordering) {
      case RateOrdering::FirstFaster: out << "first protocol is faster\n"; break;
      case RateOrdering::SecondFaster: out << "second protocol is faster\n"; break;
      case RateOrdering::Tie: out << "no winner within one recording interval\n"; break;
    }
    return kExitOk;
  } catch (const Incomparable& e) {
    err << "error: " << e.what() << "\n";
    return kExitIncomparable;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace consensus
