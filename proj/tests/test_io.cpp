#include "mjcons/config.hpp"
#include "mjcons/matrix_io.hpp"
#include "mjcons/protocol_io.hpp"
#include "mjcons/rng.hpp"
#include "mjcons/sim.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace mjcons;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("mjcons_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static int counter_;
  fs::path dir_;
};

int TempDir::counter_ = 0;

MatrixXd awkward_matrix() {
  MatrixXd m(3, 4);
  m << 1.0, -2.5e-300, 3.33333333333333331e17, 0.0,
      -1e-17, 7.125, -0.1, 2.0 / 3.0,
      1e300, -42.0, 1.0000000000000002, -0.0;
  return m;
}

}  // namespace

TEST(MatrixIo, RoundTripIsBitExact) {
  TempDir tmp;
  const MatrixXd m = awkward_matrix();
  io::write_matrix(tmp.file("m.txt"), m);
  const MatrixXd back = io::read_matrix(tmp.file("m.txt"));
  ASSERT_EQ(back.rows(), m.rows());
  ASSERT_EQ(back.cols(), m.cols());
  EXPECT_TRUE((back.array() == m.array()).all());
}

TEST(MatrixIo, CommentsAndErrors) {
  std::istringstream good("# header\n1 2\n\n3 4\n");
  const MatrixXd m = io::parse_matrix(good);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m(1, 1), 4.0);

  std::istringstream ragged("1 2\n3\n");
  EXPECT_THROW(io::parse_matrix(ragged), io::IoError);
  std::istringstream garbage("1 banana\n");
  EXPECT_THROW(io::parse_matrix(garbage), io::IoError);
  EXPECT_THROW(io::read_matrix("/nonexistent/file.txt"), io::IoError);
}

TEST(ProtocolIo, FullOrderRoundTrip) {
  rng::Stream stream(1);
  const auto rand = [&](int r, int c) {
    MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = stream.uniform(-10.0, 10.0);
    return m;
  };
  synth::FullOrderProtocol p;
  p.k_gain = rand(2, 3);
  p.l_gain = rand(3, 1);
  p.p1 = rand(3, 3);
  p.p2 = rand(3, 3);
  p.y = rand(3, 1);
  p.tau = 1.4;
  p.rho = 0.5;
  p.gamma = 4.0;
  p.r1 = 0.123456789012345678;
  p.r2 = 9.87e-13;

  TempDir tmp;
  io::save_protocol(tmp.file("p.txt"), p);
  const auto loaded = io::load_protocol(tmp.file("p.txt"));
  ASSERT_TRUE(std::holds_alternative<synth::FullOrderProtocol>(loaded));
  const auto& q = std::get<synth::FullOrderProtocol>(loaded);
  EXPECT_TRUE((q.k_gain.array() == p.k_gain.array()).all());
  EXPECT_TRUE((q.p1.array() == p.p1.array()).all());
  EXPECT_TRUE((q.y.array() == p.y.array()).all());
  EXPECT_EQ(q.tau, p.tau);
  EXPECT_EQ(q.r1, p.r1);
  EXPECT_EQ(q.r2, p.r2);
}

TEST(ProtocolIo, ReducedRoundTripAndErrors) {
  rng::Stream stream(2);
  const auto rand = [&](int r, int c) {
    MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = stream.uniform(-1.0, 1.0);
    return m;
  };
  synth::ReducedOrderProtocol p;
  p.f_bar = rand(2, 2);
  p.g_gain = rand(2, 1);
  p.t_map = rand(2, 3);
  p.q1_map = rand(3, 1);
  p.q2_map = rand(3, 2);
  p.k_gain = rand(1, 3);
  p.p1 = rand(3, 3);
  p.p2 = rand(2, 2);
  p.tau = 0.7;
  p.rho = 1.0;
  p.gamma = 2.0;
  p.r1 = 0.25;
  p.r2 = 11.0;

  TempDir tmp;
  io::save_protocol(tmp.file("p.txt"), p);
  const auto loaded = io::load_protocol(tmp.file("p.txt"));
  ASSERT_TRUE(std::holds_alternative<synth::ReducedOrderProtocol>(loaded));
  const auto& q = std::get<synth::ReducedOrderProtocol>(loaded);
  EXPECT_TRUE((q.t_map.array() == p.t_map.array()).all());
  EXPECT_TRUE((q.q2_map.array() == p.q2_map.array()).all());
  EXPECT_EQ(q.r2, p.r2);

  std::ofstream bad(tmp.file("bad.txt"));
  bad << "kind = banana\n";
  bad.close();
  EXPECT_THROW(io::load_protocol(tmp.file("bad.txt")), io::IoError);
  EXPECT_THROW(io::load_protocol(tmp.file("missing.txt")), io::IoError);
}

TEST(Config, ParsesAndResolvesPaths) {
  TempDir tmp;
  io::write_matrix(tmp.file("a.txt"), MatrixXd::Zero(2, 2));
  MatrixXd b(2, 1);
  b << 0, 1;
  io::write_matrix(tmp.file("b.txt"), b);
  io::write_matrix(tmp.file("c.txt"), MatrixXd::Identity(2, 2));
  io::write_matrix(tmp.file("d.txt"), b);
  MatrixXd ring(2, 2);
  ring << 0, 1, 1, 0;
  io::write_matrix(tmp.file("g1.txt"), ring);
  io::write_matrix(tmp.file("q.txt"), MatrixXd::Zero(1, 1));

  std::ofstream cfg(tmp.file("run.cfg"));
  cfg << "plant.a = a.txt\n"
      << "plant.b = b.txt\n"
      << "plant.c1 = c.txt\n"
      << "plant.c2 = c.txt\n"
      << "plant.d = d.txt\n"
      << "topology.adjacency = g1.txt\n"
      << "markov.generator = q.txt\n"
      << "synthesis.gamma = 10\n"
      << "synthesis.tau = 2.0\n"
      << "sim.t_end = 5\n"
      << "sim.n_paths = 3\n";
  cfg.close();

  const auto c = config::parse_config(tmp.file("run.cfg"));
  EXPECT_EQ(c.gamma, 10.0);
  ASSERT_TRUE(c.tau_override.has_value());
  EXPECT_EQ(*c.tau_override, 2.0);
  EXPECT_EQ(c.n_paths, 3);
  EXPECT_EQ(c.kind, "full");

  const synth::Plant plant = c.plant();
  EXPECT_EQ(plant.n(), 2);
  const auto ensemble = c.topologies();
  EXPECT_EQ(ensemble.size(), 1);
  const auto gen = c.generator();
  EXPECT_EQ(gen.state_count(), 1);
  EXPECT_EQ(c.initial_observer(2, 2).size(), 4);
  EXPECT_EQ(c.initial_states(2, 2).size(), 4);

  // effective-config round trip: parse -> write -> parse -> write gives the
  // same file
  config::write_effective_config(tmp.file("eff1.cfg"), c);
  const auto c2 = config::parse_config(tmp.file("eff1.cfg"));
  config::write_effective_config(tmp.file("eff2.cfg"), c2);
  std::ifstream f1(tmp.file("eff1.cfg")), f2(tmp.file("eff2.cfg"));
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  EXPECT_EQ(s1.str(), s2.str());
}

TEST(Config, RejectsUnknownAndMissingKeys) {
  TempDir tmp;
  {
    std::ofstream cfg(tmp.file("bad.cfg"));
    cfg << "plant.q = nope.txt\n";
  }
  EXPECT_THROW(config::parse_config(tmp.file("bad.cfg")), config::ConfigError);
  {
    std::ofstream cfg(tmp.file("empty.cfg"));
    cfg << "plant.a = a.txt\n";  // everything else missing
  }
  EXPECT_THROW(config::parse_config(tmp.file("empty.cfg")), config::ConfigError);
}

TEST(TrajectoryCsv, SchemaAndValues) {
  sim::Trajectory traj;
  traj.dt = 0.5;
  traj.times = {0.0, 0.5};
  traj.sigma = {0, 1};
  traj.n_agents = 2;
  traj.state_dim = 1;
  traj.observer_dim = 1;
  traj.states.resize(2, 2);
  traj.states << 1.5, 2.5, -1.0, -2.0;
  traj.observer_states = traj.states;
  traj.controls.resize(2, 2);
  traj.controls << 0.1, 0.2, 0.3, 0.4;
  traj.disturbance.resize(2, 2);
  traj.disturbance.setZero();

  TempDir tmp;
  sim::write_trajectory_csv(tmp.file("t.csv"), traj);
  std::ifstream in(tmp.file("t.csv"));
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header,
            "t, sigma, x[1][1], x[2][1], xhat[1][1], xhat[2][1], u[1][1], u[2][1], w[1][1], "
            "w[2][1]");
  EXPECT_EQ(row0, "0, 1, 1.5, -1, 1.5, -1, 0.10000000000000001, 0.29999999999999999, 0, 0");
  EXPECT_EQ(row1.substr(0, 6), "0.5, 2");
}
