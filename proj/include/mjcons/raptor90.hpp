#pragma once

#include "mjcons/graphs.hpp"
#include "mjcons/markov.hpp"
#include "mjcons/sim.hpp"
#include "mjcons/synthesis.hpp"

#include <cstdint>

namespace mjcons::raptor90 {

// Hover-point model of a Raptor-90 helicopter, 11 states, 3 inputs,
// 2 disturbance channels; measured outputs (phi, theta, r, p, q).
// State order: [U V p q phi theta a_s b_s W r r_fb].
synth::Plant plant();

// Four agents switching between a directed 4-ring and a pair of
// bidirectional chords; both graphs are balanced and their union (a ring
// plus chords) contains a directed spanning tree.
graphs::TopologyEnsemble topologies();

markov::MarkovGenerator generator();

// Companion realization of the benchmark reduced-order observer dynamics.
Eigen::MatrixXd reduced_observer_f();
// Fixed uniform(0, 1)-style input matrix used by the benchmark observer.
Eigen::MatrixXd reduced_observer_g();

inline constexpr double kGamma = 4.0;
inline constexpr double kTau = 1.4;
inline constexpr double kSquareWavePeriod = 6.283185307179586;  // 2 pi

sim::DisturbanceSpec square_wave_disturbance();

// Seeded agent initial states, uniform in [-1, 1]^n per agent.
Eigen::VectorXd random_initial_states(int n_agents, int state_dim, std::uint64_t seed);

// indices of the roll / pitch channels in the state vector
inline constexpr int kRollIndex = 4;
inline constexpr int kPitchIndex = 5;

}  // namespace mjcons::raptor90
