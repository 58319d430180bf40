#include "mjcons/sim.hpp"

#include "mjcons/matrix_io.hpp"
#include "mjcons/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mjcons::sim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DisturbanceSpec DisturbanceSpec::zero() { return DisturbanceSpec{}; }

DisturbanceSpec DisturbanceSpec::square_wave(const VectorXd& amplitude, double period,
                                             double phase) {
  DisturbanceSpec d;
  d.kind = Kind::SquareWave;
  d.amplitude = amplitude;
  d.period = period;
  d.phase = phase;
  return d;
}

void DisturbanceSpec::validate(int channels) const {
  switch (kind) {
    case Kind::Zero:
      return;
    case Kind::SquareWave:
      if (period <= 0.0) throw SimulationError("square wave period must be positive");
      if (amplitude.size() != channels)
        throw SimulationError("square wave needs one amplitude per disturbance channel");
      return;
    case Kind::Samples:
      if (sample_times.empty() || sample_times.size() != sample_values.size())
        throw SimulationError("sampled disturbance needs matching times and values");
      for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (sample_times[i] <= sample_times[i - 1])
          throw SimulationError("sample times must be strictly increasing");
      for (const auto& v : sample_values)
        if (v.size() != channels) throw SimulationError("sample value has wrong channel count");
      return;
  }
}

VectorXd DisturbanceSpec::value(double t, int channels) const {
  switch (kind) {
    case Kind::Zero:
      return VectorXd::Zero(channels);
    case Kind::SquareWave: {
      const double s = std::sin(2.0 * std::numbers::pi * t / period + phase);
      return (s >= 0.0 ? 1.0 : -1.0) * amplitude;
    }
    case Kind::Samples: {
      auto it = std::upper_bound(sample_times.begin(), sample_times.end(), t);
      if (it == sample_times.begin()) return VectorXd::Zero(channels);
      const auto idx = static_cast<std::size_t>(std::distance(sample_times.begin(), it)) - 1;
      return sample_values[idx];
    }
  }
  return VectorXd::Zero(channels);
}

namespace {

constexpr double kBlowupLimit = 1e12;

// Agent-block product: returns the n x N matrix whose column i is
// sum_j L(i, j) x_j, i.e. the stacked (L (x) I_n) action reshaped.
inline MatrixXd laplacian_mix(const MatrixXd& x_cols, const MatrixXd& lap) {
  return x_cols * lap.transpose();
}

struct GridSpec {
  int steps;
  double dt;
};

GridSpec make_grid(const SimOptions& opts) {
  if (opts.dt <= 0.0 || opts.t_end <= 0.0)
    throw SimulationError("t_end and dt must be positive");
  const int steps = static_cast<int>(std::llround(opts.t_end / opts.dt));
  if (steps < 1) throw SimulationError("t_end shorter than one step");
  return GridSpec{steps, opts.dt};
}

// Integrates d/dt [X; O] with a stage-rate callback over one interval of
// constant topology, splitting exactly at jump times inside [t, t + h].
template <typename Rate>
void rk4_span(double t0, double h_total, const markov::SwitchingPath& path, const Rate& rate,
              MatrixXd& x, MatrixXd& o, MatrixXd& k1x, MatrixXd& k1o, MatrixXd& k2x,
              MatrixXd& k2o, MatrixXd& k3x, MatrixXd& k3o, MatrixXd& k4x, MatrixXd& k4o,
              MatrixXd& wx, MatrixXd& wo) {
  double t = t0;
  double remaining = h_total;
  const double tiny = 1e-12 * h_total;
  while (remaining > tiny) {
    const int sigma = path.state_at(t);
    auto next = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t);
    double h = remaining;
    if (next != path.jump_times.end()) h = std::min(h, *next - t);
    if (h <= tiny) {  // guard against a zero-length sliver from round-off
      remaining -= h;
      t += h;
      continue;
    }

    rate(t, x, o, sigma, k1x, k1o);
    wx = x + 0.5 * h * k1x;
    wo = o + 0.5 * h * k1o;
    rate(t + 0.5 * h, wx, wo, sigma, k2x, k2o);
    wx = x + 0.5 * h * k2x;
    wo = o + 0.5 * h * k2o;
    rate(t + 0.5 * h, wx, wo, sigma, k3x, k3o);
    wx = x + h * k3x;
    wo = o + h * k3o;
    rate(t + h, wx, wo, sigma, k4x, k4o);
    x += (h / 6.0) * (k1x + 2.0 * (k2x + k3x) + k4x);
    o += (h / 6.0) * (k1o + 2.0 * (k2o + k3o) + k4o);
    t += h;
    remaining -= h;
  }
}

void check_ensemble_vs_path(const graphs::TopologyEnsemble& ensemble,
                            const markov::SwitchingPath& path) {
  for (int s : path.states)
    if (s < 0 || s >= ensemble.size())
      throw SimulationError("switching path visits a state with no matching topology");
}

}  // namespace

markov::SwitchingPath sample_switching_path(const markov::MarkovGenerator& gen, double t_end,
                                            std::uint64_t seed) {
  const auto dist = markov::stationary_distribution(gen);
  const int initial = markov::sample_state(dist, seed ^ 0x5bf0f1ea3c1d4b09ULL);
  return markov::sample_path(gen, initial, t_end, seed);
}

Trajectory simulate_full_order(const synth::Plant& plant, const synth::FullOrderProtocol& proto,
                               const graphs::TopologyEnsemble& ensemble,
                               const markov::SwitchingPath& path, const VectorXd& x0,
                               const VectorXd& xhat0, const SimOptions& opts) {
  plant.validate();
  check_ensemble_vs_path(ensemble, path);
  const int n = plant.n();
  const int m = plant.m();
  const int l = plant.l();
  const int n_agents = ensemble.node_count();
  if (x0.size() != n * n_agents || xhat0.size() != n * n_agents)
    throw SimulationError("initial state vectors have wrong dimension");
  opts.disturbance.validate(l);
  const GridSpec grid = make_grid(opts);
  if (path.end_time < opts.t_end - 1e-9)
    throw SimulationError("switching path ends before t_end");

  const MatrixXd tau_bk = proto.tau * plant.b * proto.k_gain;
  const MatrixXd lc1 = proto.l_gain * plant.c1;
  const MatrixXd a_obs = plant.a - tau_bk + lc1;

  Trajectory traj;
  traj.dt = grid.dt;
  traj.n_agents = n_agents;
  traj.state_dim = n;
  traj.observer_dim = n;
  const int n_t = grid.steps + 1;
  traj.times.resize(static_cast<std::size_t>(n_t));
  traj.sigma.resize(static_cast<std::size_t>(n_t));
  traj.states.resize(n * n_agents, n_t);
  traj.observer_states.resize(n * n_agents, n_t);
  traj.controls.resize(m * n_agents, n_t);
  traj.disturbance.resize(l * n_agents, n_t);

  MatrixXd x = Eigen::Map<const MatrixXd>(x0.data(), n, n_agents);
  MatrixXd xh = Eigen::Map<const MatrixXd>(xhat0.data(), n, n_agents);
  MatrixXd k1x(n, n_agents), k1o(n, n_agents), k2x(n, n_agents), k2o(n, n_agents);
  MatrixXd k3x(n, n_agents), k3o(n, n_agents), k4x(n, n_agents), k4o(n, n_agents);
  MatrixXd wx(n, n_agents), wo(n, n_agents);

  const auto rate = [&](double t, const MatrixXd& xs, const MatrixXd& os, int sigma,
                        MatrixXd& dx, MatrixXd& dobs) {
    const VectorXd w = opts.disturbance.value(t, l);
    dx.noalias() = plant.a * xs;
    dx.noalias() -= tau_bk * os;
    dx.noalias() += (plant.d * w) * Eigen::RowVectorXd::Ones(n_agents);
    dobs.noalias() = a_obs * os;
    dobs.noalias() -= lc1 * laplacian_mix(xs, ensemble.laplacian(sigma));
  };

  const auto record = [&](int idx, double t) {
    traj.times[static_cast<std::size_t>(idx)] = t;
    const int sigma = path.state_at(t);
    traj.sigma[static_cast<std::size_t>(idx)] = sigma;
    traj.states.col(idx) = Eigen::Map<const VectorXd>(x.data(), n * n_agents);
    traj.observer_states.col(idx) = Eigen::Map<const VectorXd>(xh.data(), n * n_agents);
    const MatrixXd u = -proto.tau * proto.k_gain * xh;
    traj.controls.col(idx) = Eigen::Map<const VectorXd>(u.data(), m * n_agents);
    const VectorXd w = opts.disturbance.value(t, l);
    for (int i = 0; i < n_agents; ++i) traj.disturbance.col(idx).segment(i * l, l) = w;
  };

  record(0, 0.0);
  for (int step = 0; step < grid.steps; ++step) {
    const double t = step * grid.dt;
    rk4_span(t, grid.dt, path, rate, x, xh, k1x, k1o, k2x, k2o, k3x, k3o, k4x, k4o, wx, wo);
    const double norm = std::max(x.cwiseAbs().maxCoeff(), xh.cwiseAbs().maxCoeff());
    if (!std::isfinite(norm) || norm > kBlowupLimit)
      throw NumericalBlowupError((step + 1) * grid.dt);
    record(step + 1, (step + 1) * grid.dt);
  }
  return traj;
}

Trajectory simulate_reduced_order(const synth::Plant& plant,
                                  const synth::ReducedOrderProtocol& proto,
                                  const graphs::TopologyEnsemble& ensemble,
                                  const markov::SwitchingPath& path, const VectorXd& x0,
                                  const VectorXd& v0, const SimOptions& opts) {
  plant.validate();
  check_ensemble_vs_path(ensemble, path);
  const int n = plant.n();
  const int m = plant.m();
  const int l = plant.l();
  const int k = proto.observer_dim();
  const int n_agents = ensemble.node_count();
  if (x0.size() != n * n_agents || v0.size() != k * n_agents)
    throw SimulationError("initial state vectors have wrong dimension");
  opts.disturbance.validate(l);
  const GridSpec grid = make_grid(opts);
  if (path.end_time < opts.t_end - 1e-9)
    throw SimulationError("switching path ends before t_end");

  const MatrixXd kq1c1 = proto.k_gain * proto.q1_map * plant.c1;  // m x n
  const MatrixXd kq2 = proto.k_gain * proto.q2_map;               // m x k
  const MatrixXd gc1 = proto.g_gain * plant.c1;
  const MatrixXd tb = proto.t_map * plant.b;
  const MatrixXd td = proto.t_map * plant.d;

  Trajectory traj;
  traj.dt = grid.dt;
  traj.n_agents = n_agents;
  traj.state_dim = n;
  traj.observer_dim = k;
  const int n_t = grid.steps + 1;
  traj.times.resize(static_cast<std::size_t>(n_t));
  traj.sigma.resize(static_cast<std::size_t>(n_t));
  traj.states.resize(n * n_agents, n_t);
  traj.observer_states.resize(k * n_agents, n_t);
  traj.controls.resize(m * n_agents, n_t);
  traj.disturbance.resize(l * n_agents, n_t);

  MatrixXd x = Eigen::Map<const MatrixXd>(x0.data(), n, n_agents);
  MatrixXd v = Eigen::Map<const MatrixXd>(v0.data(), k, n_agents);
  MatrixXd k1x(n, n_agents), k1o(k, n_agents), k2x(n, n_agents), k2o(k, n_agents);
  MatrixXd k3x(n, n_agents), k3o(k, n_agents), k4x(n, n_agents), k4o(k, n_agents);
  MatrixXd wx(n, n_agents), wo(k, n_agents);

  const auto control = [&](const MatrixXd& xs, const MatrixXd& vs, int sigma) -> MatrixXd {
    const MatrixXd& lap = ensemble.laplacian(sigma);
    MatrixXd u = kq1c1 * laplacian_mix(xs, lap);
    u.noalias() += kq2 * laplacian_mix(vs, lap);
    return (-proto.tau) * u;
  };

  const auto rate = [&](double t, const MatrixXd& xs, const MatrixXd& vs, int sigma,
                        MatrixXd& dx, MatrixXd& dv) {
    const VectorXd w = opts.disturbance.value(t, l);
    const MatrixXd u = control(xs, vs, sigma);
    dx.noalias() = plant.a * xs;
    dx.noalias() += plant.b * u;
    dx.noalias() += (plant.d * w) * Eigen::RowVectorXd::Ones(n_agents);
    dv.noalias() = proto.f_bar * vs;
    dv.noalias() += gc1 * xs;
    dv.noalias() += tb * u;
    if (opts.observer_disturbance_feedthrough)
      dv.noalias() += (td * w) * Eigen::RowVectorXd::Ones(n_agents);
  };

  const auto record = [&](int idx, double t) {
    traj.times[static_cast<std::size_t>(idx)] = t;
    const int sigma = path.state_at(t);
    traj.sigma[static_cast<std::size_t>(idx)] = sigma;
    traj.states.col(idx) = Eigen::Map<const VectorXd>(x.data(), n * n_agents);
    traj.observer_states.col(idx) = Eigen::Map<const VectorXd>(v.data(), k * n_agents);
    const MatrixXd u = control(x, v, sigma);
    traj.controls.col(idx) = Eigen::Map<const VectorXd>(u.data(), m * n_agents);
    const VectorXd w = opts.disturbance.value(t, l);
    for (int i = 0; i < n_agents; ++i) traj.disturbance.col(idx).segment(i * l, l) = w;
  };

  record(0, 0.0);
  for (int step = 0; step < grid.steps; ++step) {
    const double t = step * grid.dt;
    rk4_span(t, grid.dt, path, rate, x, v, k1x, k1o, k2x, k2o, k3x, k3o, k4x, k4o, wx, wo);
    const double norm = std::max(x.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
    if (!std::isfinite(norm) || norm > kBlowupLimit)
      throw NumericalBlowupError((step + 1) * grid.dt);
    record(step + 1, (step + 1) * grid.dt);
  }
  return traj;
}

Trajectory simulate_full_order(const synth::Plant& plant, const synth::FullOrderProtocol& proto,
                               const graphs::TopologyEnsemble& ensemble,
                               const markov::MarkovGenerator& gen, const VectorXd& x0,
                               const VectorXd& xhat0, const SimOptions& opts,
                               std::uint64_t seed) {
  return simulate_full_order(plant, proto, ensemble, sample_switching_path(gen, opts.t_end, seed),
                             x0, xhat0, opts);
}

Trajectory simulate_reduced_order(const synth::Plant& plant,
                                  const synth::ReducedOrderProtocol& proto,
                                  const graphs::TopologyEnsemble& ensemble,
                                  const markov::MarkovGenerator& gen, const VectorXd& x0,
                                  const VectorXd& v0, const SimOptions& opts, std::uint64_t seed) {
  return simulate_reduced_order(plant, proto, ensemble,
                                sample_switching_path(gen, opts.t_end, seed), x0, v0, opts);
}

ConsensusSignals consensus_signals(const Trajectory& traj, const synth::Plant& plant) {
  const int n = plant.n();
  const int q2 = plant.q2();
  const int na = traj.n_agents;
  if (traj.state_dim != n) throw SimulationError("trajectory does not match the plant");
  const int n_t = traj.grid_points();
  const MatrixXd mproj = graphs::mean_removal_projector(na);

  ConsensusSignals sig;
  sig.zeta.resize(n * na, n_t);
  sig.z_tr.resize(q2 * na, n_t);
  const bool full_order = traj.observer_dim == n;
  if (full_order) sig.delta.resize(n * na, n_t);

  for (int j = 0; j < n_t; ++j) {
    const Eigen::Map<const MatrixXd> xm(traj.states.col(j).data(), n, na);
    const MatrixXd zm = xm * mproj;  // M symmetric
    sig.zeta.col(j) = Eigen::Map<const VectorXd>(zm.data(), n * na);
    for (int i = 0; i < na; ++i)
      sig.z_tr.col(j).segment(i * q2, q2).noalias() = plant.c2 * zm.col(i);
    if (full_order) {
      const Eigen::Map<const MatrixXd> om(traj.observer_states.col(j).data(), n, na);
      const MatrixXd dm = (om - xm) * mproj;
      sig.delta.col(j) = Eigen::Map<const VectorXd>(dm.data(), n * na);
    }
  }
  return sig;
}

std::vector<double> zeta_squared_norm(const Trajectory& traj) {
  const int n = traj.state_dim;
  const int na = traj.n_agents;
  const MatrixXd mproj = graphs::mean_removal_projector(na);
  std::vector<double> out(static_cast<std::size_t>(traj.grid_points()));
  for (int j = 0; j < traj.grid_points(); ++j) {
    const Eigen::Map<const MatrixXd> xm(traj.states.col(j).data(), n, na);
    out[static_cast<std::size_t>(j)] = (xm * mproj).squaredNorm();
  }
  return out;
}

TransientMetrics transient_metrics(const std::vector<double>& signal, double dt,
                                   double settle_band) {
  TransientMetrics tm;
  if (signal.size() < 2 || dt <= 0.0 || settle_band <= 0.0)
    throw SimulationError("transient_metrics: bad arguments");
  const double final_value = signal.back();
  const double step = final_value - signal.front();
  double peak_dev = 0.0;
  for (const double s : signal) peak_dev = std::max(peak_dev, std::abs(s - final_value));
  const double scale = std::max(std::abs(step), peak_dev);
  if (scale == 0.0) {  // constant signal
    tm.settled = true;
    return tm;
  }

  // Overshoot: how far the signal runs past its final value, against the
  // direction it came from.
  const double dir = step >= 0.0 ? 1.0 : -1.0;
  double beyond = 0.0;
  for (const double s : signal) beyond = std::max(beyond, dir * (s - final_value));
  tm.overshoot = beyond / scale;

  const double band = settle_band * scale;
  std::size_t last_outside = 0;
  bool any_outside = false;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (std::abs(signal[i] - final_value) > band) {
      last_outside = i;
      any_outside = true;
    }
  }
  tm.settled = !any_outside || last_outside + 1 < signal.size();
  tm.settling_time = any_outside ? (static_cast<double>(last_outside) + 1.0) * dt : 0.0;

  // First peak of |signal - final|, then count sign changes after it.
  std::size_t first_peak = 0;
  for (std::size_t i = 1; i + 1 < signal.size(); ++i) {
    const double prev = std::abs(signal[i - 1] - final_value);
    const double cur = std::abs(signal[i] - final_value);
    const double nxt = std::abs(signal[i + 1] - final_value);
    if (cur >= prev && cur > nxt) {
      first_peak = i;
      break;
    }
    if (cur < prev) {  // started moving toward the final value immediately
      first_peak = i - 1;
      break;
    }
  }
  int crossings = 0;
  double prev_sign = 0.0;
  for (std::size_t i = first_peak; i < signal.size(); ++i) {
    const double dev = signal[i] - final_value;
    if (dev == 0.0) continue;
    const double s = dev > 0.0 ? 1.0 : -1.0;
    if (prev_sign != 0.0 && s != prev_sign) ++crossings;
    prev_sign = s;
  }
  tm.oscillation_count = crossings;
  return tm;
}

namespace {

double trapezoid_sq(const MatrixXd& series, double dt) {
  double acc = 0.0;
  const int n_t = static_cast<int>(series.cols());
  for (int j = 0; j < n_t; ++j) {
    const double v = series.col(j).squaredNorm();
    acc += (j == 0 || j == n_t - 1) ? 0.5 * v : v;
  }
  return acc * dt;
}

}  // namespace

PerformanceReport jtr_ratio(const std::vector<Trajectory>& trajs, const synth::Plant& plant,
                            double gamma) {
  if (trajs.empty()) throw SimulationError("jtr_ratio needs at least one trajectory");
  const Trajectory& first = trajs.front();
  const int n = plant.n();
  const int na = first.n_agents;
  for (const Trajectory& t : trajs) {
    const bool same_x0 = (t.states.col(0).array() == first.states.col(0).array()).all();
    const bool same_o0 =
        (t.observer_states.col(0).array() == first.observer_states.col(0).array()).all();
    if (!same_x0 || !same_o0 || t.grid_points() != first.grid_points() || t.dt != first.dt)
      throw SimulationError("jtr_ratio: trajectories do not share one scenario");
  }

  // Initial-condition energy terms of the ratio's denominator.
  const VectorXd x0 = first.states.col(0);
  double denom = 0.0;
  for (int i = 0; i < na; ++i) {
    const VectorXd xi = x0.segment(i * n, n);
    denom += xi.dot(plant.r_weight * xi);
  }
  const int od = first.observer_dim;
  const MatrixXd r_obs = plant.r_weight.topLeftCorner(od, od);
  const VectorXd o0 = first.observer_states.col(0);
  for (int i = 0; i < na; ++i) {
    const VectorXd oi = o0.segment(i * od, od);
    denom += oi.dot(r_obs * oi);
  }
  denom += trapezoid_sq(first.disturbance, first.dt);

  PerformanceReport rep;
  rep.gamma_squared = gamma * gamma;
  rep.n_paths = static_cast<int>(trajs.size());

  std::vector<double> energies;
  energies.reserve(trajs.size());
  double zeta0 = 0.0, zeta_end = 0.0, tail = 0.0;
  for (const Trajectory& t : trajs) {
    const ConsensusSignals sig = consensus_signals(t, plant);
    energies.push_back(trapezoid_sq(sig.z_tr, t.dt));
    zeta0 += sig.zeta.col(0).squaredNorm();
    zeta_end += sig.zeta.col(t.grid_points() - 1).squaredNorm();
    // crude tail estimate: last-value energy times a decay constant fitted
    // over the final tenth of the horizon
    const int n_t = t.grid_points();
    const int j0 = (9 * n_t) / 10;
    const double e0 = sig.z_tr.col(j0).squaredNorm();
    const double e1 = sig.z_tr.col(n_t - 1).squaredNorm();
    if (e1 > 0.0 && e0 > e1) {
      const double lambda = std::log(e0 / e1) / ((n_t - 1 - j0) * t.dt);
      tail += e1 / lambda;
    }
  }
  const double n_paths = static_cast<double>(trajs.size());
  double mean = 0.0;
  for (const double e : energies) mean += e;
  mean /= n_paths;
  double var = 0.0;
  for (const double e : energies) var += (e - mean) * (e - mean);
  var = trajs.size() > 1 ? var / (n_paths - 1.0) : 0.0;

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
  return rep;
}

std::string describe(const PerformanceReport& rep) {
  std::ostringstream os;
  os << "  paths                  : " << rep.n_paths << "\n";
  os << "  J ratio                : " << rep.jtr_ratio << " (std err " << rep.jtr_std_error
     << ")\n";
  os << "  gamma^2                : " << rep.gamma_squared
     << (rep.ratio_below_gamma_sq ? "  (bound holds)" : "  (BOUND VIOLATED)") << "\n";
  os << "  output energy (mean)   : " << rep.ztr_energy_mean << "\n";
  os << "  denominator            : " << rep.denominator << "\n";
  os << "  truncation tail bound  : " << rep.tail_bound << "\n";
  os << "  |zeta|^2 initial->final: " << rep.consensus_error_initial << " -> "
     << rep.consensus_error_final << "\n";
  if (rep.settled)
    os << "  settling time (2% band): " << rep.settling_time << " s\n";
  else
    os << "  settling time          : unsettled at horizon\n";
  if (rep.degenerate_scenario)
    os << "  note: z_tr identically zero (degenerate scenario)\n";
  return os.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw SimulationError("cannot open " + path + " for writing");
  const int na = traj.n_agents;
  out << "t, sigma";
  const auto header_block = [&](const char* name, int per_agent) {
    for (int i = 1; i <= na; ++i)
      for (int k = 1; k <= per_agent; ++k) out << ", " << name << "[" << i << "][" << k << "]";
  };
  header_block("x", traj.state_dim);
  header_block(traj.observer_dim == traj.state_dim ? "xhat" : "v", traj.observer_dim);
  header_block("u", static_cast<int>(traj.controls.rows()) / na);
  header_block("w", static_cast<int>(traj.disturbance.rows()) / na);
  out << "\n";
  for (int j = 0; j < traj.grid_points(); ++j) {
    out << io::format_double(traj.times[static_cast<std::size_t>(j)]) << ", "
        << traj.sigma[static_cast<std::size_t>(j)] + 1;
    const auto dump = [&](const Eigen::MatrixXd& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) out << ", " << io::format_double(m(r, j));
    };
    dump(traj.states);
    dump(traj.observer_states);
    dump(traj.controls);
    dump(traj.disturbance);
    out << "\n";
  }
  if (!out) throw SimulationError("write failed: " + path);
}

}  // namespace mjcons::sim
