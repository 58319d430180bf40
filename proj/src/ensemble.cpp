#include "mjcons/ensemble.hpp"

#include <cmath>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mjcons::sim {

namespace {

Trajectory simulate_one(const EnsembleSpec& spec, int path_index) {
  const std::uint64_t seed = spec.master_seed + 1 + static_cast<std::uint64_t>(path_index);
  const markov::SwitchingPath path =
      sample_switching_path(*spec.generator, spec.sim.t_end, seed);
  if (std::holds_alternative<synth::FullOrderProtocol>(*spec.protocol)) {
    return simulate_full_order(*spec.plant, std::get<synth::FullOrderProtocol>(*spec.protocol),
                               *spec.topology, path, spec.x0, spec.observer0, spec.sim);
  }
  return simulate_reduced_order(*spec.plant, std::get<synth::ReducedOrderProtocol>(*spec.protocol),
                                *spec.topology, path, spec.x0, spec.observer0, spec.sim);
}

PathSummary summarize(const EnsembleSpec& spec, const Trajectory& traj) {
  PathSummary s;
  s.zeta_sq = zeta_squared_norm(traj);
  s.zeta_sq_initial = s.zeta_sq.front();
  s.zeta_sq_final = s.zeta_sq.back();
  const ConsensusSignals sig = consensus_signals(traj, *spec.plant);
  const int n_t = traj.grid_points();
  s.ztr_sq.resize(static_cast<std::size_t>(n_t));
  double acc = 0.0;
  for (int j = 0; j < n_t; ++j) {
    const double v = sig.z_tr.col(j).squaredNorm();
    s.ztr_sq[static_cast<std::size_t>(j)] = v;
    acc += (j == 0 || j == n_t - 1) ? 0.5 * v : v;
  }
  s.ztr_energy = acc * traj.dt;
  const int n = traj.state_dim;
  s.probe_signals.resize(spec.probes.size());
  for (std::size_t p = 0; p < spec.probes.size(); ++p) {
    const auto [agent, channel] = spec.probes[p];
    auto& sigvec = s.probe_signals[p];
    sigvec.resize(static_cast<std::size_t>(n_t));
    for (int j = 0; j < n_t; ++j)
      sigvec[static_cast<std::size_t>(j)] = sig.zeta(agent * n + channel, j);
  }
  return s;
}

void validate_spec(const EnsembleSpec& spec) {
  if (!spec.plant || !spec.protocol || !spec.topology || !spec.generator)
    throw SimulationError("ensemble spec is missing a component");
  if (spec.n_paths < 1) throw SimulationError("n_paths must be >= 1");
}

template <typename Work>
void run_paths(int n_paths, Execution exec, const Work& work) {
  std::exception_ptr failure = nullptr;
#ifdef _OPENMP
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_paths; ++i) {
      try {
        work(i);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n_paths; ++i) work(i);
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec, Execution exec,
                            const PathCallback& callback) {
  validate_spec(spec);
  EnsembleResult result;
  result.paths.resize(static_cast<std::size_t>(spec.n_paths));
  result.dt = spec.sim.dt;

  run_paths(spec.n_paths, exec, [&](int i) {
    const Trajectory traj = simulate_one(spec, i);
    result.paths[static_cast<std::size_t>(i)] = summarize(spec, traj);
    if (callback) callback(i, traj);
  });

  // Aggregate in fixed path order so serial and parallel runs agree bitwise.
  const std::size_t n_t = result.paths.front().zeta_sq.size();
  result.mean_zeta_sq.assign(n_t, 0.0);
  for (const PathSummary& p : result.paths)
    for (std::size_t j = 0; j < n_t; ++j) result.mean_zeta_sq[j] += p.zeta_sq[j];
  for (double& v : result.mean_zeta_sq) v /= static_cast<double>(spec.n_paths);
  return result;
}

std::vector<Trajectory> run_ensemble_trajectories(const EnsembleSpec& spec, Execution exec) {
  validate_spec(spec);
  std::vector<Trajectory> out(static_cast<std::size_t>(spec.n_paths));
  run_paths(spec.n_paths, exec, [&](int i) { out[static_cast<std::size_t>(i)] = simulate_one(spec, i); });
  return out;
}

PerformanceReport performance_from_ensemble(const EnsembleSpec& spec,
                                            const EnsembleResult& result, double gamma) {
  const synth::Plant& plant = *spec.plant;
  const int n = plant.n();
  const int na = spec.topology->node_count();
  const int od = static_cast<int>(spec.observer0.size()) / na;

  double denom = 0.0;
  for (int i = 0; i < na; ++i) {
    const Eigen::VectorXd xi = spec.x0.segment(i * n, n);
    denom += xi.dot(plant.r_weight * xi);
  }
  const Eigen::MatrixXd r_obs = plant.r_weight.topLeftCorner(od, od);
  for (int i = 0; i < na; ++i) {
    const Eigen::VectorXd oi = spec.observer0.segment(i * od, od);
    denom += oi.dot(r_obs * oi);
  }
  const int steps = static_cast<int>(std::llround(spec.sim.t_end / spec.sim.dt));
  const int l = plant.l();
  for (int j = 0; j <= steps; ++j) {
    const double w2 = na * spec.sim.disturbance.value(j * spec.sim.dt, l).squaredNorm();
    denom += ((j == 0 || j == steps) ? 0.5 : 1.0) * w2 * spec.sim.dt;
  }

  PerformanceReport rep;
  rep.gamma_squared = gamma * gamma;
  rep.n_paths = spec.n_paths;
  const double n_paths = static_cast<double>(spec.n_paths);

  double mean = 0.0;
  for (const PathSummary& p : result.paths) mean += p.ztr_energy;
  mean /= n_paths;
  double var = 0.0;
  for (const PathSummary& p : result.paths)
    var += (p.ztr_energy - mean) * (p.ztr_energy - mean);
  var = spec.n_paths > 1 ? var / (n_paths - 1.0) : 0.0;

  double zeta0 = 0.0, zeta_end = 0.0, tail = 0.0;
  for (const PathSummary& p : result.paths) {
    zeta0 += p.zeta_sq_initial;
    zeta_end += p.zeta_sq_final;
    const std::size_t n_t = p.ztr_sq.size();
    const std::size_t j0 = (9 * n_t) / 10;
    const double e0 = p.ztr_sq[j0];
    const double e1 = p.ztr_sq.back();
    if (e1 > 0.0 && e0 > e1) {
      const double lambda =
          std::log(e0 / e1) / (static_cast<double>(n_t - 1 - j0) * result.dt);
      tail += e1 / lambda;
    }
  }

  rep.ztr_energy_mean = mean;
  rep.denominator = denom;
  rep.tail_bound = tail / n_paths;
  rep.consensus_error_initial = zeta0 / n_paths;
  rep.consensus_error_final = zeta_end / n_paths;
  rep.degenerate_scenario = mean == 0.0;
  if (denom <= 0.0)
    throw ZeroDenominatorError("scenario excluded: zero disturbance and zero weighted initials");
  rep.jtr_ratio = mean / denom;
  rep.jtr_std_error = std::sqrt(var / n_paths) / denom;
  rep.ratio_below_gamma_sq = rep.jtr_ratio < rep.gamma_squared;

  std::vector<double> rms(result.mean_zeta_sq.size());
  for (std::size_t j = 0; j < rms.size(); ++j) rms[j] = std::sqrt(result.mean_zeta_sq[j]);
  const TransientMetrics tm = transient_metrics(rms, result.dt, 0.02);
  rep.settling_time = tm.settling_time;
  rep.settled = tm.settled;
  rep.overshoot = tm.overshoot;
  return rep;
}

}  // namespace mjcons::sim
