// Times the Monte-Carlo ensemble kernel: serial reference vs OpenMP, same
// seeds, same aggregation order. The two runs must agree bitwise.

#include "mjcons/ensemble.hpp"
#include "mjcons/raptor90.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mjcons;
namespace chrono = std::chrono;

namespace {

double run_and_time(const sim::EnsembleSpec& spec, sim::Execution exec,
                    sim::EnsembleResult& out) {
  const auto t0 = chrono::steady_clock::now();
  out = sim::run_ensemble(spec, exec);
  const auto t1 = chrono::steady_clock::now();
  return chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n_paths = argc > 1 ? std::atoi(argv[1]) : 8;
  const double t_end = argc > 2 ? std::atof(argv[2]) : 5.0;

  const synth::Plant plant = raptor90::plant();
  const graphs::TopologyEnsemble topology = raptor90::topologies();
  const markov::MarkovGenerator gen = raptor90::generator();
  const graphs::SpectralConstants sc = graphs::spectral_constants(topology);
  const auto stat = markov::stationary_distribution(gen);

  synth::FullOrderOptions opts;
  opts.tau_override = raptor90::kTau;
  const auto outcome =
      synth::synthesize_full_order(plant, sc, stat.pi_bar, raptor90::kGamma, opts);
  if (!outcome.feasible) {
    std::cerr << "benchmark synthesis failed:\n" << outcome.log;
    return 1;
  }
  const sim::Protocol proto = *outcome.protocol;

  sim::EnsembleSpec spec;
  spec.plant = &plant;
  spec.protocol = &proto;
  spec.topology = &topology;
  spec.generator = &gen;
  spec.x0 = raptor90::random_initial_states(topology.node_count(), plant.n(), 11);
  spec.observer0 = Eigen::VectorXd::Zero(topology.node_count() * plant.n());
  spec.sim.t_end = t_end;
  spec.sim.dt = 1e-3;
  spec.sim.disturbance = raptor90::square_wave_disturbance();
  spec.n_paths = n_paths;
  spec.master_seed = 7;

  sim::EnsembleResult serial, parallel;
  const double t_serial = run_and_time(spec, sim::Execution::Serial, serial);
  const double t_parallel = run_and_time(spec, sim::Execution::Parallel, parallel);

  double max_diff = 0.0;
  for (std::size_t j = 0; j < serial.mean_zeta_sq.size(); ++j)
    max_diff = std::max(max_diff, std::abs(serial.mean_zeta_sq[j] - parallel.mean_zeta_sq[j]));

#ifdef _OPENMP
  std::cout << "threads          : " << omp_get_max_threads() << "\n";
#else
  std::cout << "threads          : 1 (OpenMP disabled)\n";
#endif
  std::cout << "paths            : " << n_paths << ", horizon " << t_end << " s\n";
  std::cout << "serial           : " << t_serial << " ms\n";
  std::cout << "parallel         : " << t_parallel << " ms\n";
  std::cout << "speedup          : " << t_serial / t_parallel << "x\n";
  std::cout << "max |difference| : " << max_diff << (max_diff == 0.0 ? "  (bitwise equal)" : "")
            << "\n";
  return max_diff == 0.0 ? 0 : 1;
}
