#pragma once

#include "mjcons/graphs.hpp"
#include "mjcons/markov.hpp"
#include "mjcons/synthesis.hpp"

// Small fixtures shared by the synthesis and simulation tests.

inline mjcons::synth::Plant double_integrator_plant() {
  mjcons::synth::Plant p;
  p.a.resize(2, 2);
  p.a << 0, 1, 0, 0;
  p.b.resize(2, 1);
  p.b << 0, 1;
  p.c1 = Eigen::MatrixXd::Identity(2, 2);
  p.c2 = Eigen::MatrixXd::Identity(2, 2);
  p.d.resize(2, 1);
  p.d << 0, 1;
  p.r_weight = Eigen::MatrixXd::Identity(2, 2);
  return p;
}

// Both states measurable is overkill for a reduced observer; this variant
// only measures position.
inline mjcons::synth::Plant double_integrator_position_output() {
  mjcons::synth::Plant p = double_integrator_plant();
  p.c1.resize(1, 2);
  p.c1 << 1, 0;
  return p;
}

inline mjcons::graphs::TopologyEnsemble two_agent_ring() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  std::vector<mjcons::graphs::Digraph> gs;
  gs.emplace_back(a);
  return mjcons::graphs::TopologyEnsemble(std::move(gs));
}

inline mjcons::markov::MarkovGenerator single_state_generator() {
  return mjcons::markov::MarkovGenerator(Eigen::MatrixXd::Zero(1, 1));
}
