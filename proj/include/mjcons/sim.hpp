#pragma once

#include "mjcons/graphs.hpp"
#include "mjcons/markov.hpp"
#include "mjcons/synthesis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mjcons::sim {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalBlowupError : SimulationError {
  explicit NumericalBlowupError(double t)
      : SimulationError("state norm exceeded 1e12 at t = " + std::to_string(t)), time(t) {}
  double time;
};

struct ZeroDenominatorError : SimulationError {
  using SimulationError::SimulationError;
};

// Disturbance applied identically to every agent.
struct DisturbanceSpec {
  enum class Kind { Zero, SquareWave, Samples };
  Kind kind = Kind::Zero;
  // SquareWave: amplitude(c) * sign(sin(2 pi t / period + phase)) per channel.
  Eigen::VectorXd amplitude;
  double period = 0.0;
  double phase = 0.0;
  // Samples: zero-order hold over a strictly increasing time grid.
  std::vector<double> sample_times;
  std::vector<Eigen::VectorXd> sample_values;

  static DisturbanceSpec zero();
  static DisturbanceSpec square_wave(const Eigen::VectorXd& amplitude, double period,
                                     double phase = 0.0);

  Eigen::VectorXd value(double t, int channels) const;
  void validate(int channels) const;
};

// Closed-loop record on a uniform grid; column j is the snapshot at times[j].
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<int> sigma;          // 0-based Markov state per grid point
  Eigen::MatrixXd states;          // (N n)  x n_t
  Eigen::MatrixXd observer_states; // (N n) or (N (n-q1)) x n_t
  Eigen::MatrixXd controls;        // (N m)  x n_t
  Eigen::MatrixXd disturbance;     // (N l)  x n_t
  int n_agents = 0;
  int state_dim = 0;
  int observer_dim = 0;

  int grid_points() const { return static_cast<int>(times.size()); }
};

struct SimOptions {
  double t_end = 10.0;
  double dt = 1e-3;
  DisturbanceSpec disturbance;
  // The reduced-order observer integrates T D w(t) as written; switching this
  // off drops the term for the case where agents cannot measure their own
  // disturbance.
  bool observer_disturbance_feedthrough = true;
};

// Fixed-step classical RK4; integration steps are split exactly at the
// Markov jump times so the active Laplacian is constant within each step.
Trajectory simulate_full_order(const synth::Plant& plant, const synth::FullOrderProtocol& proto,
                               const graphs::TopologyEnsemble& ensemble,
                               const markov::SwitchingPath& path, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& xhat0, const SimOptions& opts);

Trajectory simulate_reduced_order(const synth::Plant& plant,
                                  const synth::ReducedOrderProtocol& proto,
                                  const graphs::TopologyEnsemble& ensemble,
                                  const markov::SwitchingPath& path, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& v0, const SimOptions& opts);

// Convenience overloads that sample the switching path from the generator
// (initial Markov state drawn from the stationary distribution).
Trajectory simulate_full_order(const synth::Plant& plant, const synth::FullOrderProtocol& proto,
                               const graphs::TopologyEnsemble& ensemble,
                               const markov::MarkovGenerator& gen, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& xhat0, const SimOptions& opts,
                               std::uint64_t seed);

Trajectory simulate_reduced_order(const synth::Plant& plant,
                                  const synth::ReducedOrderProtocol& proto,
                                  const graphs::TopologyEnsemble& ensemble,
                                  const markov::MarkovGenerator& gen, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& v0, const SimOptions& opts,
                                  std::uint64_t seed);

markov::SwitchingPath sample_switching_path(const markov::MarkovGenerator& gen, double t_end,
                                            std::uint64_t seed);

struct ConsensusSignals {
  Eigen::MatrixXd zeta;   // (N n)  x n_t, (M (x) I) x
  Eigen::MatrixXd z_tr;   // (N q2) x n_t, (I (x) C2) zeta
  Eigen::MatrixXd delta;  // (N n)  x n_t for full-order runs, empty otherwise
};

ConsensusSignals consensus_signals(const Trajectory& traj, const synth::Plant& plant);

// Squared consensus-error norm |zeta(t)|^2 per grid point.
std::vector<double> zeta_squared_norm(const Trajectory& traj);

struct TransientMetrics {
  double overshoot = 0.0;
  double settling_time = 0.0;
  int oscillation_count = 0;
  bool settled = false;  // signal inside the band at the end of the record
};

// overshoot: peak deviation beyond the final value, relative to the initial
// step; settling_time: last departure from the +-band around the final value
// (band relative to the step size); oscillations: zero crossings of
// (signal - final) after the first peak.
TransientMetrics transient_metrics(const std::vector<double>& signal, double dt,
                                   double settle_band);

struct PerformanceReport {
  double jtr_ratio = 0.0;
  double jtr_std_error = 0.0;
  double gamma_squared = 0.0;
  double ztr_energy_mean = 0.0;
  double denominator = 0.0;
  double tail_bound = 0.0;  // |z_tr(t_end)|^2 x estimated decay constant
  double consensus_error_final = 0.0;   // mean |zeta(t_end)|^2
  double consensus_error_initial = 0.0;
  double settling_time = 0.0;
  bool settled = false;
  double overshoot = 0.0;
  int n_paths = 0;
  bool ratio_below_gamma_sq = false;
  bool degenerate_scenario = false;  // z_tr identically zero
};

// Monte-Carlo estimate of the disturbance-attenuation ratio over trajectories
// sharing one scenario (same initial states and disturbance). Observer
// initial conditions are weighted with R (full order) or its leading
// principal block (reduced order).
PerformanceReport jtr_ratio(const std::vector<Trajectory>& trajs, const synth::Plant& plant,
                            double gamma);

std::string describe(const PerformanceReport& rep);

// CSV schema: t, sigma (1-based), x[i][k]..., xhat_or_v[i][k]..., u[i][k]...,
// w[i][k]...; one row per grid point, 17 significant digits.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace mjcons::sim
