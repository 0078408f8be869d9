#include "consensus/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

namespace consensus::io {

namespace {

struct Line {
  std::string text;
  long number;  // 1-based position in the source
};

// Content lines only: blanks and '#' comments dropped, numbering preserved.
std::vector<Line> content_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  long number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    lines.push_back({raw, number});
  }
  return lines;
}

[[noreturn]] void fail(const std::string& source, long line, long column,
                       const std::string& message) {
  std::ostringstream what;
  what << source << ":" << line;
  if (column > 0) what << ":" << column;
  what << ": " << message;
  throw ParseError(what.str(), line, column);
}

double parse_double_token(const std::string& token, const std::string& source, long line,
                          long column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(source, line, column, "expected a number, got '" + token + "'");
  return v;
}

long parse_long_token(const std::string& token, const std::string& source, long line,
                      long column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    fail(source, line, column, "expected an integer, got '" + token + "'");
  return v;
}

struct Token {
  std::string text;
  long column;  // 1-based offset of the first character
};

std::vector<Token> split_whitespace(const std::string& text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    const size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    tokens.push_back({text.substr(start, i - start), static_cast<long>(start) + 1});
  }
  return tokens;
}

std::vector<Token> split_commas(const std::string& text) {
  std::vector<Token> tokens;
  size_t start = 0;
  for (;;) {
    const size_t comma = text.find(',', start);
    const size_t end = comma == std::string::npos ? text.size() : comma;
    size_t lo = start, hi = end;
    while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1]))) --hi;
    tokens.push_back({text.substr(lo, hi - lo), static_cast<long>(lo) + 1});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return tokens;
}

WeightedDigraph<double> parse_matrix_graph(const std::vector<Line>& lines,
                                           const std::string& source) {
  const auto header = split_whitespace(lines[0].text);
  if (header.size() != 1)
    fail(source, lines[0].number, 1, "matrix header must be a single node count");
  const long n = parse_long_token(header[0].text, source, lines[0].number, header[0].column);
  if (n < 1) fail(source, lines[0].number, header[0].column, "node count must be positive");
  if (static_cast<long>(lines.size()) - 1 != n)
    fail(source, lines[0].number, 1,
         "expected " + std::to_string(n) + " matrix rows, got " +
             std::to_string(lines.size() - 1));

  Mxd weights(n, n);
  for (long i = 0; i < n; ++i) {
    const Line& row = lines[static_cast<size_t>(i) + 1];
    const auto tokens = split_commas(row.text);
    if (static_cast<long>(tokens.size()) != n)
      fail(source, row.number, 1,
           "expected " + std::to_string(n) + " entries, got " +
               std::to_string(tokens.size()));
    for (long j = 0; j < n; ++j)
      weights(i, j) = parse_double_token(tokens[static_cast<size_t>(j)].text, source,
                                         row.number, tokens[static_cast<size_t>(j)].column);
  }
  return WeightedDigraph<double>(std::move(weights));
}

WeightedDigraph<double> parse_edge_graph(const std::vector<Line>& lines,
                                         const std::string& source) {
  const auto header = split_whitespace(lines[0].text);
  if (header.size() != 2 || header[0].text != "edges")
    fail(source, lines[0].number, 1, "edge list header must be 'edges <node count>'");
  const long n = parse_long_token(header[1].text, source, lines[0].number, header[1].column);
  if (n < 1) fail(source, lines[0].number, header[1].column, "node count must be positive");

  Mxd weights = Mxd::Zero(n, n);
  std::vector<char> seen(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
  for (size_t k = 1; k < lines.size(); ++k) {
    const Line& line = lines[k];
    const auto tokens = split_whitespace(line.text);
    if (tokens.size() != 3)
      fail(source, line.number, 1, "edge lines must be '<listener> <source> <weight>'");
    const long i = parse_long_token(tokens[0].text, source, line.number, tokens[0].column);
    const long j = parse_long_token(tokens[1].text, source, line.number, tokens[1].column);
    const double w = parse_double_token(tokens[2].text, source, line.number, tokens[2].column);
    if (i < 0 || i >= n)
      fail(source, line.number, tokens[0].column, "node index out of range");
    if (j < 0 || j >= n)
      fail(source, line.number, tokens[1].column, "node index out of range");
    if (i == j) fail(source, line.number, tokens[0].column, "self-loops are not allowed");
    if (seen[static_cast<size_t>(i * n + j)])
      fail(source, line.number, tokens[0].column, "duplicate edge");
    seen[static_cast<size_t>(i * n + j)] = 1;
    if (!(w >= 0) || !std::isfinite(w))
      fail(source, line.number, tokens[2].column, "edge weight must be finite and non-negative");
    weights(i, j) = w;
  }
  return WeightedDigraph<double>(std::move(weights));
}

}  // namespace

GraphFormat parse_graph_format(const std::string& name) {
  if (name == "auto") return GraphFormat::Auto;
  if (name == "matrix") return GraphFormat::Matrix;
  if (name == "edges") return GraphFormat::EdgeList;
  throw ConfigError("unknown graph format '" + name + "' (expected auto, matrix, or edges)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

WeightedDigraph<double> parse_graph(std::istream& in, const std::string& source,
                                    GraphFormat format) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw ParseError(source + ": no content lines", 0, 0);
  if (format == GraphFormat::Auto) {
    const auto head = split_whitespace(lines[0].text);
    format = !head.empty() && head[0].text == "edges" ? GraphFormat::EdgeList
                                                      : GraphFormat::Matrix;
  }
  try {
    return format == GraphFormat::Matrix ? parse_matrix_graph(lines, source)
                                         : parse_edge_graph(lines, source);
  } catch (const InvariantViolation& e) {
    throw ParseError(source + ": " + e.what(), 0, 0);
  }
}

WeightedDigraph<double> read_graph(const std::string& path, GraphFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file", 0, 0);
  return parse_graph(in, path, format);
}

std::string format_graph(const WeightedDigraph<double>& g) {
  std::ostringstream out;
  const auto n = g.size();
  out << n << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << ",";
      out << format_double(g.weights(i, j));
    }
    out << "\n";
  }
  return out.str();
}

void write_graph(const std::string& path, const WeightedDigraph<double>& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << format_graph(g);
}

Vxd parse_number_list(const std::string& text, const std::string& what) {
  const auto tokens = split_commas(text);
  Vxd values(static_cast<Eigen::Index>(tokens.size()));
  for (size_t k = 0; k < tokens.size(); ++k)
    values(static_cast<Eigen::Index>(k)) =
        parse_double_token(tokens[k].text, what, 1, tokens[k].column);
  return values;
}

Protocol<double> parse_protocol_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "piecewise") {
    if (!arg.empty())
      throw ParseError("protocol spec '" + spec + "': piecewise takes no argument", 0, 0);
    return Protocol<double>::piecewise_power_root();
  }
  if (kind == "linear" || kind == "linsin") {
    if (arg.empty())
      throw ParseError("protocol spec '" + spec + "': missing gain after ':'", 0, 0);
    const double alpha = parse_double_token(arg, "protocol spec '" + spec + "'", 1, 1);
    return kind == "linear" ? Protocol<double>::linear(alpha)
                            : Protocol<double>::linear_plus_sine(alpha);
  }
  if (kind == "table") {
    if (arg.empty())
      throw ParseError("protocol spec '" + spec + "': missing file path after ':'", 0, 0);
    return read_table_protocol(arg);
  }
  throw ParseError("protocol spec '" + spec + "': unknown kind (expected linear, linsin, piecewise, or table)",
                   0, 0);
}

Protocol<double> read_table_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file", 0, 0);
  const auto lines = content_lines(in);
  if (lines.size() < 2) throw ParseError(path + ": need at least two sample rows", 0, 0);

  Vxd w(static_cast<Eigen::Index>(lines.size()));
  Vxd h(static_cast<Eigen::Index>(lines.size()));
  for (size_t k = 0; k < lines.size(); ++k) {
    const auto tokens = split_whitespace(lines[k].text);
    if (tokens.size() != 2)
      fail(path, lines[k].number, 1, "sample rows must be '<w> <h>'");
    w(static_cast<Eigen::Index>(k)) =
        parse_double_token(tokens[0].text, path, lines[k].number, tokens[0].column);
    h(static_cast<Eigen::Index>(k)) =
        parse_double_token(tokens[1].text, path, lines[k].number, tokens[1].column);
  }
  try {
    return Protocol<double>::table(std::move(w), std::move(h));
  } catch (const InvariantViolation& e) {
    throw ParseError(path + ": " + e.what(), 0, 0);
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj) {
  const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << (i + 1);
  out << ",V,x_xi,disagreement\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out << "," << format_double(s.x(i));
    out << "," << format_double(s.lyapunov) << "," << format_double(s.weighted_avg) << ","
        << format_double(s.disagreement) << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory<double>& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  std::ostringstream buffer;
  write_trajectory_csv(buffer, traj);
  out << buffer.str();
}

}  // namespace consensus::io
