#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "consensus/io.hpp"
#include "support.hpp"

using namespace consensus;
using testsupport::make_rng;
using testsupport::random_digraph;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "consensus_io_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_scratch(const std::string& name, const std::string& content) {
  const fs::path path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("numbers print in the shortest form that parses back exactly") {
  CHECK(io::format_double(0.25) == "0.25");
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(io::format_double(-0.5) == "-0.5");
  const double values[] = {1.0 / 3.0,  0.1,          1e-300, -0.0, 12345.6789,
                           3.141592653589793, 2.25,  1e300,  5e-324};
  for (const double v : values) {
    const std::string text = io::format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("matrix graph files parse with comments and blank lines") {
  std::istringstream in(
      "# three agents\n"
      "\n"
      "3\n"
      "0,1,1\n"
      "0, 0, 1\n"
      "1,0,0\n");
  const auto g = io::parse_graph(in, "inline");
  REQUIRE(g.size() == 3);
  Mxd expected(3, 3);
  expected << 0, 1, 1,
              0, 0, 1,
              1, 0, 0;
  CHECK((g.weights.array() == expected.array()).all());
}

TEST_CASE("edge list files build the same graph as their matrix form") {
  std::istringstream in(
      "edges 3\n"
      "0 1 1\n"
      "0 2 1\n"
      "1 2 1\n"
      "2 0 1\n");
  const auto g = io::parse_graph(in, "inline");
  Mxd expected(3, 3);
  expected << 0, 1, 1,
              0, 0, 1,
              1, 0, 0;
  CHECK((g.weights.array() == expected.array()).all());
}

TEST_CASE("graph writing round-trips bit for bit") {
  auto rng = make_rng(89);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_digraph(rng, 2 + trial % 6, 0.6, 1e-3, 1e3);
    const std::string text = io::format_graph(g);
    std::istringstream in(text);
    const auto back = io::parse_graph(in, "roundtrip");
    REQUIRE(back.size() == g.size());
    CHECK((back.weights.array() == g.weights.array()).all());
  }
}

TEST_CASE("parse failures carry source, line, and column") {
  SUBCASE("bad number in a matrix row") {
    std::istringstream in("2\n0,1\nx,0\n");
    try {
      io::parse_graph(in, "bad.txt");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 3);
      CHECK(e.column == 1);
      CHECK(std::string(e.what()).find("bad.txt:3:1") != std::string::npos);
    }
  }
  SUBCASE("wrong entry count") {
    std::istringstream in("2\n0,1\n0\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("missing rows") {
    std::istringstream in("3\n0,1,1\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("empty input") {
    std::istringstream in("   \n# only a comment\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("self-loop in an edge list") {
    std::istringstream in("edges 2\n1 1 0.5\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("duplicate edge") {
    std::istringstream in("edges 2\n0 1 0.5\n0 1 0.25\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("index out of range") {
    std::istringstream in("edges 2\n0 2 0.5\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("negative weight in an edge list") {
    std::istringstream in("edges 2\n0 1 -0.5\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("negative weight in a matrix becomes a parse error") {
    std::istringstream in("2\n0,-1\n1,0\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
  SUBCASE("nonzero diagonal in a matrix becomes a parse error") {
    std::istringstream in("2\n1,1\n1,0\n");
    CHECK_THROWS_AS(io::parse_graph(in, "bad.txt"), ParseError);
  }
}

TEST_CASE("explicit format selection overrides detection") {
  std::istringstream matrix_in("edges 2\n0 1 1\n");
  CHECK_THROWS_AS(io::parse_graph(matrix_in, "f", io::GraphFormat::Matrix), ParseError);
  std::istringstream edges_in("2\n0,1\n1,0\n");
  CHECK_THROWS_AS(io::parse_graph(edges_in, "f", io::GraphFormat::EdgeList), ParseError);
  CHECK(io::parse_graph_format("auto") == io::GraphFormat::Auto);
  CHECK(io::parse_graph_format("matrix") == io::GraphFormat::Matrix);
  CHECK(io::parse_graph_format("edges") == io::GraphFormat::EdgeList);
  CHECK_THROWS_AS(io::parse_graph_format("csv"), ConfigError);
}

TEST_CASE("reading a missing graph file reports the path") {
  try {
    io::read_graph("definitely_not_here.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("definitely_not_here.txt") != std::string::npos);
  }
}

TEST_CASE("number lists split on commas") {
  const Vxd v = io::parse_number_list("1, 2.5 ,-3e2", "x0");
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == 2.5);
  CHECK(v(2) == -300.0);
  CHECK_THROWS_AS(io::parse_number_list("", "x0"), ParseError);
  CHECK_THROWS_AS(io::parse_number_list("1,,2", "x0"), ParseError);
  CHECK_THROWS_AS(io::parse_number_list("1,two", "x0"), ParseError);
}

TEST_CASE("protocol specs parse into the right families") {
  CHECK(io::parse_protocol_spec("linear:2")(3.0) == 6.0);
  CHECK(io::parse_protocol_spec("linear:2").label() == "linear:2");
  CHECK(io::parse_protocol_spec("linsin:0.5").kind() == ProtocolKind::LinearPlusSine);
  CHECK(io::parse_protocol_spec("piecewise").kind() == ProtocolKind::PiecewisePowerRoot);
  CHECK_THROWS_AS(io::parse_protocol_spec("cubic:2"), ParseError);
  CHECK_THROWS_AS(io::parse_protocol_spec("linear:"), ParseError);
  CHECK_THROWS_AS(io::parse_protocol_spec("linear"), ParseError);
  CHECK_THROWS_AS(io::parse_protocol_spec("linear:abc"), ParseError);
  CHECK_THROWS_AS(io::parse_protocol_spec("piecewise:1"), ParseError);
  CHECK_THROWS_AS(io::parse_protocol_spec("table:"), ParseError);
}

TEST_CASE("table protocols load from sample files") {
  const auto path = write_scratch("table_ok.txt",
                                  "# odd ramp\n"
                                  "-1 -1\n"
                                  "0 0\n"
                                  "1 1\n");
  const auto p = io::read_table_protocol(path.string());
  CHECK(p.kind() == ProtocolKind::TableDefined);
  CHECK(p(0.5) == 0.5);
  CHECK(io::parse_protocol_spec("table:" + path.string())(0.25) == 0.25);

  const auto bad_row = write_scratch("table_bad_row.txt", "-1 -1\n0 0 0\n1 1\n");
  try {
    io::read_table_protocol(bad_row.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }

  const auto not_increasing = write_scratch("table_flat.txt", "-1 -1\n0 0\n1 0\n");
  CHECK_THROWS_AS(io::read_table_protocol(not_increasing.string()), ParseError);
  CHECK_THROWS_AS(io::read_table_protocol("missing_table.txt"), ParseError);
}

TEST_CASE("trajectory files carry the expected header and frozen rows") {
  Trajectory<double> traj;
  traj.consensus_tol = 1e-6;
  traj.sample_interval = 0.5;
  Vxd x0(2), x1(2);
  x0 << 1, -1;
  x1 << 0.5, -0.5;
  traj.samples.push_back({0.0, x0, 0.5, 0.25, 2.0});
  traj.samples.push_back({0.5, x1, 0.125, 0.25, 1.0});

  std::ostringstream out;
  io::write_trajectory_csv(out, traj);
  CHECK(out.str() ==
        "t,x_1,x_2,V,x_xi,disagreement\n"
        "0,1,-1,0.5,0.25,2\n"
        "0.5,0.5,-0.5,0.125,0.25,1\n");
}

TEST_CASE("trajectory files spell out missing certificates as nan") {
  Trajectory<double> traj;
  Vxd x(1);
  x << 2;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  traj.samples.push_back({0.0, x, nan, nan, 0.0});
  std::ostringstream out;
  io::write_trajectory_csv(out, traj);
  CHECK(out.str() ==
        "t,x_1,V,x_xi,disagreement\n"
        "0,2,nan,nan,0\n");
}

TEST_CASE("trajectory writing is deterministic on disk") {
  auto rng = make_rng(97);
  Trajectory<double> traj;
  traj.consensus_tol = 1e-6;
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    Vxd x(3);
    x << coord(rng), coord(rng), coord(rng);
    traj.samples.push_back({0.01 * k, x, coord(rng), coord(rng), coord(rng)});
  }
  const auto a = scratch_dir() / "traj_a.csv";
  const auto b = scratch_dir() / "traj_b.csv";
  io::write_trajectory_csv(a.string(), traj);
  io::write_trajectory_csv(b.string(), traj);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}
