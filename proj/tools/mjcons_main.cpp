#include "mjcons/config.hpp"
#include "mjcons/ensemble.hpp"
#include "mjcons/matrix_io.hpp"
#include "mjcons/protocol_io.hpp"
#include "mjcons/raptor90.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mjcons;

namespace {

// exit codes: 0 success, 1 input error, 2 infeasible / check failed,
// 3 numerical blowup
constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kCheckFailed = 2;
constexpr int kBlowup = 3;

struct Network {
  synth::Plant plant;
  graphs::TopologyEnsemble topology;
  markov::MarkovGenerator generator;
  graphs::SpectralConstants sc{};
  markov::StationaryDistribution stat{};
};

Network make_network(synth::Plant plant, graphs::TopologyEnsemble topology,
                     markov::MarkovGenerator generator) {
  Network net{std::move(plant), std::move(topology), std::move(generator)};
  for (int i = 0; i < net.topology.size(); ++i)
    if (!graphs::is_balanced(net.topology.graph(i)))
      throw config::ConfigError("topology " + std::to_string(i + 1) + " is not balanced");
  if (!graphs::union_has_spanning_tree(net.topology))
    throw config::ConfigError("union graph has no directed spanning tree");
  if (net.topology.size() != net.generator.state_count())
    throw config::ConfigError("number of topologies must match the Markov state count");
  if (!markov::is_ergodic(net.generator))
    throw config::ConfigError("Markov generator is not ergodic");
  net.sc = graphs::spectral_constants(net.topology);
  net.stat = markov::stationary_distribution(net.generator);
  return net;
}

Network load_network(const config::RunConfig& cfg) {
  return make_network(cfg.plant(), cfg.topologies(), cfg.generator());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw io::IoError("cannot write " + path.string());
}

synth::CertificateReport verify(const io::ProtocolVariant& proto, const Network& net) {
  if (std::holds_alternative<synth::FullOrderProtocol>(proto))
    return synth::verify_full_order(std::get<synth::FullOrderProtocol>(proto), net.plant, net.sc,
                                    net.stat.pi_bar);
  return synth::reduced_certificates(std::get<synth::ReducedOrderProtocol>(proto), net.plant,
                                     net.sc, net.stat.pi_bar);
}

struct SimRun {
  sim::EnsembleSpec spec;  // owns x0 / observer0
  sim::EnsembleResult ensemble;
  sim::PerformanceReport perf;
};

SimRun run_simulation(const Network& net, const io::ProtocolVariant& proto,
                      const config::RunConfig& cfg, const fs::path& out_dir,
                      const std::vector<std::pair<int, int>>& probes = {}) {
  SimRun run;
  sim::EnsembleSpec& spec = run.spec;
  spec.plant = &net.plant;
  spec.protocol = &proto;
  spec.topology = &net.topology;
  spec.generator = &net.generator;
  const int na = net.topology.node_count();
  const int od = std::holds_alternative<synth::FullOrderProtocol>(proto)
                     ? net.plant.n()
                     : std::get<synth::ReducedOrderProtocol>(proto).observer_dim();
  spec.x0 = cfg.initial_states(na, net.plant.n());
  spec.observer0 = cfg.initial_observer(na, od);
  spec.sim.t_end = cfg.t_end;
  spec.sim.dt = cfg.dt;
  spec.sim.disturbance = cfg.disturbance_spec(net.plant.l());
  spec.sim.observer_disturbance_feedthrough = cfg.observer_feedthrough;
  spec.n_paths = cfg.n_paths;
  spec.master_seed = cfg.seed;
  spec.probes = probes;

  const int csv_paths = std::min(cfg.csv_paths, cfg.n_paths);
  const std::string prefix = cfg.kind + "_path_";
  const sim::PathCallback callback = [&](int i, const sim::Trajectory& traj) {
    if (i < csv_paths)
      sim::write_trajectory_csv((out_dir / (prefix + std::to_string(i + 1) + ".csv")).string(),
                                traj);
  };

  run.ensemble = sim::run_ensemble(spec, sim::Execution::Parallel, callback);
  run.perf = sim::performance_from_ensemble(spec, run.ensemble, cfg.gamma);
  return run;
}

int eval_performance(const sim::PerformanceReport& perf, const config::RunConfig& cfg,
                     std::ostream& os) {
  bool consensus_ok = true;
  if (perf.consensus_error_initial > 0.0)
    consensus_ok =
        perf.consensus_error_final <= cfg.consensus_threshold * perf.consensus_error_initial;
  os << (consensus_ok ? "consensus threshold met\n" : "consensus threshold NOT met\n");
  if (perf.degenerate_scenario) os << "note: degenerate scenario, z_tr identically zero\n";
  return (perf.ratio_below_gamma_sq && consensus_ok) ? kOk : kCheckFailed;
}

io::ProtocolVariant synthesize_for(const Network& net, const config::RunConfig& cfg,
                                   const synth::ReducedOrderOptions* reduced_override,
                                   std::string& log) {
  if (cfg.kind == "full") {
    const auto outcome = synth::synthesize_full_order(net.plant, net.sc, net.stat.pi_bar,
                                                      cfg.gamma, cfg.full_order_options());
    log = outcome.log;
    if (!outcome.feasible) throw synth::SynthesisError("synthesis infeasible:\n" + outcome.log);
    return *outcome.protocol;
  }
  const synth::ReducedOrderOptions ropts =
      reduced_override ? *reduced_override : cfg.reduced_order_options();
  const auto outcome =
      synth::synthesize_reduced_order(net.plant, net.sc, net.stat.pi_bar, cfg.gamma, ropts);
  log = outcome.log;
  if (!outcome.feasible) throw synth::SynthesisError("synthesis infeasible:\n" + outcome.log);
  return *outcome.protocol;
}

int cmd_synthesize(const config::RunConfig& cfg, const std::string& out) {
  const Network net = load_network(cfg);
  fs::create_directories(out);
  config::write_effective_config((fs::path(out) / "effective_config.txt").string(), cfg);

  std::string log;
  io::ProtocolVariant proto;
  try {
    proto = synthesize_for(net, cfg, nullptr, log);
  } catch (const synth::SynthesisError& e) {
    std::cerr << e.what() << "\n";
    write_text(fs::path(out) / "synthesis_log.txt", log.empty() ? e.what() : log);
    return kCheckFailed;
  }
  write_text(fs::path(out) / "synthesis_log.txt", log);
  io::save_protocol((fs::path(out) / "protocol.txt").string(), proto);
  const synth::CertificateReport rep = verify(proto, net);
  write_text(fs::path(out) / "certificate_report.txt", synth::describe(rep));
  std::cout << synth::describe(rep);
  if (!rep.passed) return kCheckFailed;
  std::cout << "protocol written to " << (fs::path(out) / "protocol.txt").string() << "\n";
  return kOk;
}

int cmd_verify(const config::RunConfig& cfg, const std::string& protocol_path,
               const std::string& out) {
  const Network net = load_network(cfg);
  const io::ProtocolVariant proto = io::load_protocol(protocol_path);
  const synth::CertificateReport rep = verify(proto, net);
  std::cout << synth::describe(rep);
  if (!out.empty()) {
    fs::create_directories(out);
    write_text(fs::path(out) / "certificate_report.txt", synth::describe(rep));
  }
  return rep.passed ? kOk : kCheckFailed;
}

int cmd_simulate(const config::RunConfig& cfg, const std::string& protocol_path,
                 const std::string& out) {
  const Network net = load_network(cfg);
  const io::ProtocolVariant proto = io::load_protocol(protocol_path);
  const synth::CertificateReport rep = verify(proto, net);
  if (!rep.passed) {
    std::cerr << "protocol does not verify against this configuration:\n" << synth::describe(rep);
    return kCheckFailed;
  }
  fs::create_directories(out);
  config::write_effective_config((fs::path(out) / "effective_config.txt").string(), cfg);
  const SimRun run = run_simulation(net, proto, cfg, out);
  std::ostringstream report;
  report << sim::describe(run.perf);
  const int status = eval_performance(run.perf, cfg, report);
  write_text(fs::path(out) / "performance_report.txt", report.str());
  std::cout << report.str();
  return status;
}

// ---- helicopter demo ----------------------------------------------------

config::RunConfig demo_config(const std::string& kind, int paths, std::uint64_t seed) {
  config::RunConfig cfg;
  cfg.kind = kind;
  cfg.gamma = raptor90::kGamma;
  cfg.tau_override = raptor90::kTau;
  cfg.t_end = 20.0;
  cfg.dt = 1e-3;
  cfg.n_paths = paths;
  cfg.seed = seed;
  cfg.disturbance = "square";
  cfg.square_amplitude = {1.0};
  cfg.square_period = raptor90::kSquareWavePeriod;
  cfg.x0_seed = seed + 7;
  return cfg;
}

struct DemoRun {
  int status = kCheckFailed;
  sim::PerformanceReport perf;
  sim::EnsembleResult ensemble;
};

DemoRun run_demo_kind(const Network& net, const std::string& kind, const fs::path& out_dir,
                      int paths, std::uint64_t seed) {
  DemoRun demo;
  config::RunConfig cfg = demo_config(kind, paths, seed);

  synth::ReducedOrderOptions ropts;
  if (kind == "reduced") {
    ropts = cfg.reduced_order_options();
    ropts.f_bar_matrix = raptor90::reduced_observer_f();
    ropts.g_matrix = raptor90::reduced_observer_g();
  }

  std::string log;
  io::ProtocolVariant proto;
  try {
    proto = synthesize_for(net, cfg, kind == "reduced" ? &ropts : nullptr, log);
  } catch (const synth::SynthesisError& e) {
    std::cerr << "[" << kind << "] " << e.what() << "\n";
    write_text(out_dir / ("synthesis_log_" + kind + ".txt"), log.empty() ? e.what() : log);
    return demo;
  }
  write_text(out_dir / ("synthesis_log_" + kind + ".txt"), log);
  io::save_protocol((out_dir / ("protocol_" + kind + ".txt")).string(), proto);

  const synth::CertificateReport rep = verify(proto, net);
  write_text(out_dir / ("certificate_report_" + kind + ".txt"), synth::describe(rep));
  std::cout << "[" << kind << "] certificates:\n" << synth::describe(rep);
  if (!rep.passed) return demo;

  const std::vector<std::pair<int, int>> probes = {{0, raptor90::kRollIndex},
                                                   {3, raptor90::kPitchIndex}};
  SimRun run = run_simulation(net, proto, cfg, out_dir, probes);
  demo.perf = run.perf;
  demo.ensemble = std::move(run.ensemble);
  std::ostringstream report;
  report << sim::describe(run.perf);
  demo.status = eval_performance(run.perf, cfg, report);
  write_text(out_dir / ("performance_report_" + kind + ".txt"), report.str());
  std::cout << "[" << kind << "] performance:\n" << report.str();
  return demo;
}

struct ProbeStats {
  double overshoot = 0.0;
  double settling = 0.0;
  double oscillations = 0.0;
};

ProbeStats probe_stats(const sim::EnsembleResult& ens, std::size_t probe, double dt) {
  ProbeStats st;
  for (const auto& path : ens.paths) {
    const sim::TransientMetrics tm = sim::transient_metrics(path.probe_signals[probe], dt, 0.02);
    st.overshoot += tm.overshoot;
    st.settling += tm.settling_time;
    st.oscillations += tm.oscillation_count;
  }
  const double n = static_cast<double>(ens.paths.size());
  st.overshoot /= n;
  st.settling /= n;
  st.oscillations /= n;
  return st;
}

int cmd_helicopter_demo(const std::string& kind, const std::string& out, int paths,
                        std::uint64_t seed) {
  if (kind != "full" && kind != "reduced" && kind != "compare") {
    std::cerr << "unknown demo kind '" << kind << "'\n";
    return kInputError;
  }
  const Network net =
      make_network(raptor90::plant(), raptor90::topologies(), raptor90::generator());
  fs::create_directories(out);
  const fs::path out_dir(out);

  if (kind != "compare") return run_demo_kind(net, kind, out_dir, paths, seed).status;

  const DemoRun full = run_demo_kind(net, "full", out_dir, paths, seed);
  const DemoRun reduced = run_demo_kind(net, "reduced", out_dir, paths, seed);
  if (full.status != kOk || reduced.status != kOk) return kCheckFailed;

  const double dt = full.ensemble.dt;
  const ProbeStats roll_f = probe_stats(full.ensemble, 0, dt);
  const ProbeStats roll_r = probe_stats(reduced.ensemble, 0, dt);
  const ProbeStats pitch_f = probe_stats(full.ensemble, 1, dt);
  const ProbeStats pitch_r = probe_stats(reduced.ensemble, 1, dt);

  std::ostringstream cmp;
  cmp << "transient comparison on identical seeds (consensus deviations, path averages)\n";
  cmp << "                           full-order      reduced-order\n";
  const auto row = [&](const std::string& label, double a, double b) {
    cmp << "  " << label;
    for (std::size_t i = label.size(); i < 25; ++i) cmp << ' ';
    cmp << a << "      " << b << "\n";
  };
  row("settling |zeta| [s]", full.perf.settling_time, reduced.perf.settling_time);
  row("agent-1 roll overshoot", roll_f.overshoot, roll_r.overshoot);
  row("agent-1 roll oscillations", roll_f.oscillations, roll_r.oscillations);
  row("agent-4 pitch overshoot", pitch_f.overshoot, pitch_r.overshoot);
  row("agent-4 pitch oscillations", pitch_f.oscillations, pitch_r.oscillations);
  cmp << "  smaller pitch overshoot: "
      << (pitch_r.overshoot < pitch_f.overshoot ? "reduced-order" : "full-order")
      << " (expected reduced-order; depends on the initial conditions)\n";
  write_text(out_dir / "compare_report.txt", cmp.str());
  std::cout << cmp.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output-feedback consensus synthesis and simulation over Markov-switching "
               "topologies"};
  app.require_subcommand(1);

  std::string config_path, protocol_path, out = "out", kind = "full";
  int paths = -1;
  std::int64_t seed = -1;

  auto* synth_cmd = app.add_subcommand("synthesize", "synthesize and verify a protocol");
  synth_cmd->add_option("--config", config_path, "run configuration")->required();
  synth_cmd->add_option("--out", out, "output directory");

  auto* verify_cmd = app.add_subcommand("verify", "re-check a protocol's certificates");
  verify_cmd->add_option("--config", config_path, "run configuration")->required();
  verify_cmd->add_option("--protocol", protocol_path, "protocol file")->required();
  verify_cmd->add_option("--out", out, "output directory");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo closed-loop simulation");
  sim_cmd->add_option("--config", config_path, "run configuration")->required();
  sim_cmd->add_option("--protocol", protocol_path, "protocol file")->required();
  sim_cmd->add_option("--out", out, "output directory");
  sim_cmd->add_option("--paths", paths, "override sim.n_paths");
  sim_cmd->add_option("--seed", seed, "override sim.seed");

  auto* demo_cmd = app.add_subcommand("helicopter-demo", "four-helicopter benchmark");
  demo_cmd->add_option("--kind", kind, "full | reduced | compare");
  demo_cmd->add_option("--out", out, "output directory");
  demo_cmd->add_option("--paths", paths, "Monte-Carlo paths (default 20)");
  demo_cmd->add_option("--seed", seed, "master seed (default 2024)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synthesize(config::parse_config(config_path), out);
    if (verify_cmd->parsed())
      return cmd_verify(config::parse_config(config_path), protocol_path,
                        verify_cmd->count("--out") ? out : std::string{});
    if (sim_cmd->parsed()) {
      config::RunConfig cfg = config::parse_config(config_path);
      if (paths > 0) cfg.n_paths = paths;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      return cmd_simulate(cfg, protocol_path, out);
    }
    if (demo_cmd->parsed())
      return cmd_helicopter_demo(kind, out, paths > 0 ? paths : 20,
                                 seed >= 0 ? static_cast<std::uint64_t>(seed) : 2024u);
  } catch (const sim::NumericalBlowupError& e) {
    std::cerr << "numerical blowup: " << e.what() << "\n";
    return kBlowup;
  } catch (const sim::ZeroDenominatorError& e) {
    std::cerr << "note: " << e.what() << " (excluded scenario, nothing to check)\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
