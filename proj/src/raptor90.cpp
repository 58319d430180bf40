#include "mjcons/raptor90.hpp"

#include "mjcons/rng.hpp"

namespace mjcons::raptor90 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

synth::Plant plant() {
  MatrixXd a(11, 11);
  a << -0.1778, 0, 0, 0, 0, -9.7807, -9.7807, 0, 0, 0, 0,
      0, -0.3104, 0, 0, 9.7807, 0, 0, 9.7807, 0, 0, 0,
      -0.3326, -0.5353, 0, 0, 0, 0, 75.7640, 343.8600, 0, 0, 0,
      0.1903, -0.2940, 0, 0, 0, 0, 172.6200, -59.9580, 0, 0, 0,
      0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0,
      0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0,
      0, 0, 0, -1, 0, 0, -8.1222, 4.6535, 0, 0, 0,
      0, 0, -1, 0, 0, 0, -0.0921, -8.1222, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 17.1680, 7.1018, -0.6821, -0.1070, 0,
      0, 0, -0.2834, 0, 0, 0, 0, 0, -0.1446, -5.5561, -36.6740,
      0, 0, 0, 0, 0, 0, 0, 0, 0, 2.7492, -11.1120;

  MatrixXd b = MatrixXd::Zero(11, 3);
  b(6, 0) = 0.0632;
  b(6, 1) = 3.3390;
  b(7, 0) = 3.1739;
  b(7, 1) = 0.2216;
  b(9, 2) = -74.364;

  MatrixXd d = MatrixXd::Zero(11, 2);
  d(0, 0) = -0.1778;
  d(1, 1) = -0.3104;
  d(2, 0) = -0.3326;
  d(2, 1) = -0.5353;
  d(3, 0) = 0.1903;
  d(3, 1) = -0.2940;

  MatrixXd c1 = MatrixXd::Zero(5, 11);
  c1(0, 4) = 1;  // phi
  c1(1, 5) = 1;  // theta
  c1(2, 9) = 1;  // r
  c1(3, 2) = 1;  // p
  c1(4, 3) = 1;  // q

  synth::Plant p;
  p.a = a;
  p.b = b;
  p.c1 = c1;
  p.c2 = c1;
  p.d = d;
  p.r_weight = MatrixXd::Identity(11, 11);
  return p;
}

graphs::TopologyEnsemble topologies() {
  MatrixXd ring = MatrixXd::Zero(4, 4);  // 1 -> 2 -> 3 -> 4 -> 1
  ring(1, 0) = 1;
  ring(2, 1) = 1;
  ring(3, 2) = 1;
  ring(0, 3) = 1;
  MatrixXd chords = MatrixXd::Zero(4, 4);  // 1 <-> 3, 2 <-> 4
  chords(2, 0) = 1;
  chords(0, 2) = 1;
  chords(3, 1) = 1;
  chords(1, 3) = 1;
  std::vector<graphs::Digraph> gs;
  gs.emplace_back(ring);
  gs.emplace_back(chords);
  return graphs::TopologyEnsemble(std::move(gs));
}

markov::MarkovGenerator generator() {
  MatrixXd q(2, 2);
  q << -1, 1, 2, -2;
  return markov::MarkovGenerator(q);
}

Eigen::MatrixXd reduced_observer_f() {
  MatrixXd f = MatrixXd::Zero(6, 6);
  f.topRightCorner(5, 5).setIdentity();
  f.row(5) << -8.2944, -40.0896, -77.2416, -75.3600, -38.9200, -10.0;
  return f;
}

Eigen::MatrixXd reduced_observer_g() {
  MatrixXd g(6, 5);
  g << 0.3435, 0.2485, 0.6139, 0.1746, 0.3182,
      0.6631, 0.9087, 0.6521, 0.0599, 0.9556,
      0.5162, 0.8895, 0.6013, 0.1524, 0.0290,
      0.7967, 0.9898, 0.7978, 0.3834, 0.3972,
      0.5766, 0.3237, 0.6104, 0.0131, 0.2728,
      0.0669, 0.9874, 0.3772, 0.9654, 0.3619;
  return g;
}

sim::DisturbanceSpec square_wave_disturbance() {
  return sim::DisturbanceSpec::square_wave(VectorXd::Ones(2), kSquareWavePeriod);
}

VectorXd random_initial_states(int n_agents, int state_dim, std::uint64_t seed) {
  rng::Stream stream(seed);
  VectorXd x0(n_agents * state_dim);
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = stream.uniform(-1.0, 1.0);
  return x0;
}

}  // namespace mjcons::raptor90
