#pragma once

#include "mjcons/sim.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace mjcons::sim {

using Protocol = std::variant<synth::FullOrderProtocol, synth::ReducedOrderProtocol>;

// One Monte-Carlo scenario: a fixed plant/protocol/initial condition, with
// the switching path as the only source of randomness. Path i uses seed
// master_seed + 1 + i.
struct EnsembleSpec {
  const synth::Plant* plant = nullptr;
  const Protocol* protocol = nullptr;
  const graphs::TopologyEnsemble* topology = nullptr;
  const markov::MarkovGenerator* generator = nullptr;
  Eigen::VectorXd x0;
  Eigen::VectorXd observer0;
  SimOptions sim;
  int n_paths = 20;
  std::uint64_t master_seed = 1;
  // channels (agent, state index) whose consensus deviation is recorded
  std::vector<std::pair<int, int>> probes;
};

struct PathSummary {
  double ztr_energy = 0.0;             // integral of |z_tr|^2
  double zeta_sq_initial = 0.0;
  double zeta_sq_final = 0.0;
  std::vector<double> zeta_sq;         // |zeta(t)|^2 on the grid
  std::vector<double> ztr_sq;          // |z_tr(t)|^2 on the grid
  std::vector<std::vector<double>> probe_signals;  // per probe, per grid point
};

struct EnsembleResult {
  std::vector<PathSummary> paths;
  std::vector<double> mean_zeta_sq;  // sample mean across paths, per grid point
  double dt = 0.0;
};

enum class Execution { Serial, Parallel };

// Per-path hook (e.g. CSV export); called with the path index and the full
// trajectory. With Execution::Parallel it runs concurrently, so the callback
// must not share mutable state across paths.
using PathCallback = std::function<void(int, const Trajectory&)>;

// The Serial variant is the reference implementation; Parallel distributes
// paths over OpenMP threads and must produce bit-identical results.
EnsembleResult run_ensemble(const EnsembleSpec& spec, Execution exec,
                            const PathCallback& callback = {});

// Keeps whole trajectories (memory-heavy; meant for modest n_paths).
std::vector<Trajectory> run_ensemble_trajectories(const EnsembleSpec& spec, Execution exec);

// Performance report computed from path summaries: the denominator terms
// come from the scenario itself, so whole trajectories never need to be
// retained. Settling is measured on sqrt(mean |zeta(t)|^2) with a 2% band.
PerformanceReport performance_from_ensemble(const EnsembleSpec& spec,
                                            const EnsembleResult& result, double gamma);

}  // namespace mjcons::sim
