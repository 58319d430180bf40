#pragma once

#include "mjcons/graphs.hpp"
#include "mjcons/markov.hpp"
#include "mjcons/sim.hpp"
#include "mjcons/synthesis.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mjcons::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" configuration with dotted section prefixes. Values are
// whitespace-separated lists where plural. Relative file paths are resolved
// against the directory containing the config file.
struct RunConfig {
  // plant
  std::string plant_a, plant_b, plant_c1, plant_c2, plant_d;
  std::string plant_r;  // optional; identity when empty
  // network
  std::vector<std::string> topology_adjacency;
  std::string markov_generator;
  // synthesis
  std::string kind = "full";  // full | reduced
  double gamma = 0.0;
  std::vector<double> rho_grid{0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  std::optional<double> tau_override;
  // reduced-order observer structure
  std::vector<double> reduced_f_eigenvalues;
  std::string reduced_f_matrix;
  std::string reduced_g_matrix;
  std::uint64_t reduced_g_seed = 1;
  // simulation
  double t_end = 20.0;
  double dt = 1e-3;
  int n_paths = 20;
  std::uint64_t seed = 2024;
  std::string disturbance = "zero";  // zero | square
  std::vector<double> square_amplitude{1.0};
  double square_period = 6.283185307179586;
  double square_phase = 0.0;
  std::string x0_mode = "random";  // random | file
  std::string x0_file;
  std::uint64_t x0_seed = 99;
  double x0_scale = 1.0;
  std::string observer0_mode = "zero";  // zero | file
  std::string observer0_file;
  bool observer_feedthrough = true;
  double consensus_threshold = 1e-2;  // relative mean |zeta|^2 drop required
  int csv_paths = 1;

  // loaded artifacts
  synth::Plant plant() const;
  graphs::TopologyEnsemble topologies() const;
  markov::MarkovGenerator generator() const;
  sim::DisturbanceSpec disturbance_spec(int channels) const;
  Eigen::VectorXd initial_states(int n_agents, int state_dim) const;
  Eigen::VectorXd initial_observer(int n_agents, int observer_dim) const;
  synth::FullOrderOptions full_order_options() const;
  synth::ReducedOrderOptions reduced_order_options() const;
};

RunConfig parse_config(const std::string& path);

// Writes the configuration with every default filled in; re-running from the
// written file reproduces the run.
void write_effective_config(const std::string& path, const RunConfig& cfg);

}  // namespace mjcons::config
