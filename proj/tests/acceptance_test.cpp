// Acceptance suite: certificate- and property-based checks plus bound checks
// on the four-helicopter benchmark. Prints one PASS/FAIL line per criterion
// and exits nonzero if any fail.

#include "mjcons/ensemble.hpp"
#include "mjcons/lmi.hpp"
#include "mjcons/matops.hpp"
#include "mjcons/raptor90.hpp"
#include "mjcons/rng.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>

using namespace mjcons;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace chrono = std::chrono;

namespace {

struct Harness {
  int failures = 0;

  void criterion(int number, const std::string& label, double budget_seconds,
                 const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = chrono::steady_clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = chrono::duration<double>(chrono::steady_clock::now() - t0).count();
    if (elapsed > budget_seconds) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over runtime budget");
    }
    std::printf("%s  criterion %d: %s  [%.2f s / %.0f s]%s%s\n", ok ? "PASS" : "FAIL", number,
                label.c_str(), elapsed, budget_seconds, detail.empty() ? "" : "  -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

MatrixXd random_matrix(int r, int c, rng::Stream& stream, double scale = 1.0) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = stream.uniform(-scale, scale);
  return m;
}

struct Benchmark {
  synth::Plant plant = raptor90::plant();
  graphs::TopologyEnsemble topology = raptor90::topologies();
  markov::MarkovGenerator gen = raptor90::generator();
  graphs::SpectralConstants sc = graphs::spectral_constants(topology);
  markov::StationaryDistribution stat = markov::stationary_distribution(gen);

  std::optional<synth::FullOrderProtocol> full;
  std::optional<synth::ReducedOrderProtocol> reduced;
};

sim::EnsembleSpec benchmark_spec(const Benchmark& b, const sim::Protocol& proto, int n_paths,
                                 const sim::DisturbanceSpec& dist, double t_end) {
  sim::EnsembleSpec spec;
  spec.plant = &b.plant;
  spec.protocol = &proto;
  spec.topology = &b.topology;
  spec.generator = &b.gen;
  spec.x0 = raptor90::random_initial_states(4, 11, 2031);
  const int od = std::holds_alternative<synth::FullOrderProtocol>(proto)
                     ? 11
                     : std::get<synth::ReducedOrderProtocol>(proto).observer_dim();
  spec.observer0 = VectorXd::Zero(4 * od);
  spec.sim.t_end = t_end;
  spec.sim.dt = 1e-3;
  spec.sim.disturbance = dist;
  spec.n_paths = n_paths;
  spec.master_seed = 2024;
  return spec;
}

}  // namespace

int main() {
  Harness h;
  Benchmark bench;

  // 1. stationary distribution of the benchmark switching chain
  h.criterion(1, "stationary distribution pi = [2/3, 1/3]", 1e-3, [&](std::string& detail) {
    const auto d = markov::stationary_distribution(bench.gen);
    detail = "pi = [" + std::to_string(d.pi(0)) + ", " + std::to_string(d.pi(1)) + "]";
    return std::abs(d.pi(0) - 2.0 / 3.0) <= 1e-12 && std::abs(d.pi(1) - 1.0 / 3.0) <= 1e-12 &&
           std::abs(d.pi_bar - 1.0 / 3.0) <= 1e-12;
  });

  // 2. Young-inequality property suite
  h.criterion(2, "Young inequality on 10^4 random instances", 1.0, [&](std::string&) {
    rng::Stream stream(41);
    for (int trial = 0; trial < 10000; ++trial) {
      const int n = 1 + static_cast<int>(stream.raw() % 8);
      const VectorXd p = random_matrix(n, 1, stream, 10.0);
      const VectorXd q = random_matrix(n, 1, stream, 10.0);
      const MatrixXd g = random_matrix(n, n, stream);
      const MatrixXd phi = g.transpose() * g + 0.01 * MatrixXd::Identity(n, n);
      if (!matops::young_bound_holds(p, q, phi)) return false;
    }
    return true;
  });

  // 3. LMI solver oracle suite (Lyapunov feasibility, both directions)
  h.criterion(3, "LMI solver vs Lyapunov oracle (20 + 20 plants)", 30.0, [&](std::string& detail) {
    rng::Stream stream(42);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(stream.raw() % 11);  // up to 12 x 12
      const MatrixXd g = random_matrix(n, n, stream);
      const MatrixXd a = g - (g.norm() + 0.1) * MatrixXd::Identity(n, n);
      lmi::Problem prob;
      const auto p = prob.add_symmetric("P", n);
      auto& c1 = prob.add_constraint(n, lmi::Sense::NegativeDefinite, "lyap");
      c1.add_matrix_term(p, a.transpose(), MatrixXd::Identity(n, n));
      auto& c2 = prob.add_constraint(n, lmi::Sense::PositiveDefinite, "pd");
      c2.add_congruence(p, MatrixXd::Identity(n, n));
      const auto res = lmi::solve_feasibility(prob);
      if (!res.feasible()) {
        detail = "feasible case " + std::to_string(trial) + " reported infeasible";
        return false;
      }
      // independent re-verification by a symmetric eigensolve
      for (const double e : lmi::normalized_constraint_eigenvalues(prob, res.slots))
        if (e > -1e-7) {
          detail = "returned assignment misses the margin";
          return false;
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(stream.raw() % 11);
      MatrixXd g = random_matrix(n, n, stream);
      MatrixXd a = g - (g.norm() + 0.1) * MatrixXd::Identity(n, n);
      a(0, 0) = 0.1 + stream.uniform01();  // one unstable decoupled mode
      a.row(0).tail(n - 1).setZero();
      a.col(0).tail(n - 1).setZero();
      lmi::Problem prob;
      const auto p = prob.add_symmetric("P", n);
      auto& c1 = prob.add_constraint(n, lmi::Sense::NegativeDefinite, "lyap");
      c1.add_matrix_term(p, a.transpose(), MatrixXd::Identity(n, n));
      auto& c2 = prob.add_constraint(n, lmi::Sense::PositiveDefinite, "pd");
      c2.add_congruence(p, MatrixXd::Identity(n, n));
      if (lmi::solve_feasibility(prob).feasible()) {
        detail = "unstable case " + std::to_string(trial) + " reported feasible";
        return false;
      }
    }
    return true;
  });

  // 4. Algorithm 1 on the helicopter benchmark
  h.criterion(4, "full-order synthesis feasible and certified (gamma = 4)", 300.0,
              [&](std::string& detail) {
                synth::FullOrderOptions opts;
                opts.tau_override = raptor90::kTau;
                const auto outcome = synth::synthesize_full_order(
                    bench.plant, bench.sc, bench.stat.pi_bar, raptor90::kGamma, opts);
                if (!outcome.feasible) {
                  detail = "infeasible";
                  return false;
                }
                bench.full = outcome.protocol;
                const auto rep = synth::verify_full_order(*bench.full, bench.plant, bench.sc,
                                                          bench.stat.pi_bar);
                detail = "sigma1 " + std::to_string(rep.sigma1_max_eig) + ", sigma2 " +
                         std::to_string(rep.sigma2_max_eig) + ", tau in (" +
                         std::to_string(rep.tau_lower) + ", " + std::to_string(rep.tau_upper) +
                         ")";
                return rep.passed && rep.sigma1_max_eig < 0 && rep.sigma2_max_eig < 0 &&
                       rep.trace_cond_p1 && rep.trace_cond_p2 && rep.tau_lower < rep.tau_upper;
              });

  // 5. Algorithm 2 on the helicopter benchmark with the companion observer
  h.criterion(5, "reduced-order synthesis feasible and certified", 300.0,
              [&](std::string& detail) {
                synth::ReducedOrderOptions opts;
                opts.tau_override = raptor90::kTau;
                opts.f_bar_matrix = raptor90::reduced_observer_f();
                opts.g_matrix = raptor90::reduced_observer_g();
                const auto outcome = synth::synthesize_reduced_order(
                    bench.plant, bench.sc, bench.stat.pi_bar, raptor90::kGamma, opts);
                if (!outcome.feasible) {
                  detail = "infeasible";
                  return false;
                }
                bench.reduced = outcome.protocol;
                const auto rep = synth::reduced_certificates(*bench.reduced, bench.plant,
                                                             bench.sc, bench.stat.pi_bar);
                detail = "sylvester " + std::to_string(rep.sylvester_residual) + ", identity " +
                         std::to_string(rep.identity_residual);
                return rep.passed && rep.sylvester_residual <= 1e-8 &&
                       rep.identity_residual <= 1e-8;
              });

  if (!bench.full || !bench.reduced) {
    std::printf("FAIL  criteria 6-8 skipped: no verified protocols\n");
    h.failures += 3;
  } else {
    const sim::Protocol full_proto = *bench.full;
    const sim::Protocol reduced_proto = *bench.reduced;

    // 6. disturbance-free mean-square consensus
    h.criterion(6, "mean |zeta(20)|^2 <= 1e-4 of initial, no disturbance, both protocols",
                120.0, [&](std::string& detail) {
                  for (const auto* proto : {&full_proto, &reduced_proto}) {
                    const auto spec = benchmark_spec(bench, *proto, 20,
                                                     sim::DisturbanceSpec::zero(), 20.0);
                    const auto res = sim::run_ensemble(spec, sim::Execution::Parallel);
                    const double initial = res.mean_zeta_sq.front();
                    const double final_v = res.mean_zeta_sq.back();
                    detail += "ratio " + std::to_string(final_v / initial) + "; ";
                    if (!(final_v <= 1e-4 * initial)) return false;
                  }
                  return true;
                });

    // 7 + 8. square-wave H-infinity bound and settling bounds
    sim::PerformanceReport perf_full, perf_reduced;
    h.criterion(7, "J ratio < 16 with square-wave disturbance, 50 paths, both protocols",
                300.0, [&](std::string& detail) {
                  {
                    const auto spec = benchmark_spec(bench, full_proto, 50,
                                                     raptor90::square_wave_disturbance(), 20.0);
                    const auto res = sim::run_ensemble(spec, sim::Execution::Parallel);
                    perf_full = sim::performance_from_ensemble(spec, res, raptor90::kGamma);
                  }
                  {
                    const auto spec = benchmark_spec(bench, reduced_proto, 50,
                                                     raptor90::square_wave_disturbance(), 20.0);
                    const auto res = sim::run_ensemble(spec, sim::Execution::Parallel);
                    perf_reduced = sim::performance_from_ensemble(spec, res, raptor90::kGamma);
                  }
                  detail = "full " + std::to_string(perf_full.jtr_ratio) + ", reduced " +
                           std::to_string(perf_reduced.jtr_ratio);
                  return perf_full.jtr_ratio < 16.0 && perf_reduced.jtr_ratio < 16.0;
                });

    h.criterion(8, "settling of |zeta| (2% band) <= 8 s for both protocols", 60.0,
                [&](std::string& detail) {
                  detail = "full " + std::to_string(perf_full.settling_time) + " s, reduced " +
                           std::to_string(perf_reduced.settling_time) + " s";
                  const bool overshoot_expected = true;  // logged, non-blocking
                  (void)overshoot_expected;
                  return perf_full.settled && perf_reduced.settled &&
                         perf_full.settling_time <= 8.0 && perf_reduced.settling_time <= 8.0;
                });
  }

  // 9. integrator order check on a fixed topology
  h.criterion(9, "halving dt cuts the final-state error by >= 8x", 60.0,
              [&](std::string& detail) {
                synth::Plant plant;
                plant.a.resize(2, 2);
                plant.a << 0, 1, 0, 0;
                plant.b.resize(2, 1);
                plant.b << 0, 1;
                plant.c1 = MatrixXd::Identity(2, 2);
                plant.c2 = MatrixXd::Identity(2, 2);
                plant.d.resize(2, 1);
                plant.d << 0, 1;
                plant.r_weight = MatrixXd::Identity(2, 2);
                MatrixXd ring(2, 2);
                ring << 0, 1, 1, 0;
                std::vector<graphs::Digraph> gs;
                gs.emplace_back(ring);
                const graphs::TopologyEnsemble topology(std::move(gs));
                const auto sc = graphs::spectral_constants(topology);
                const auto outcome = synth::synthesize_full_order(plant, sc, 1.0, 10.0);
                if (!outcome.feasible) {
                  detail = "setup synthesis failed";
                  return false;
                }
                markov::SwitchingPath path;
                path.jump_times = {0.0};
                path.states = {0};
                path.end_time = 2.0;
                VectorXd x0(4), xh0(4);
                x0 << 1.0, -0.4, -0.7, 0.2;
                xh0 << 0.2, 0.0, 0.0, -0.2;
                const auto run = [&](double dt) {
                  sim::SimOptions o;
                  o.t_end = 2.0;
                  o.dt = dt;
                  const auto traj = sim::simulate_full_order(plant, *outcome.protocol, topology,
                                                             path, x0, xh0, o);
                  return VectorXd(traj.states.col(traj.grid_points() - 1));
                };
                const VectorXd coarse = run(0.08);
                const VectorXd half = run(0.04);
                const VectorXd reference = run(0.02);
                const double ratio =
                    (coarse - reference).norm() / (half - reference).norm();
                detail = "error ratio " + std::to_string(ratio);
                return ratio >= 8.0;
              });

  if (h.failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", h.failures);
  return 1;
}
