#include "mjcons/config.hpp"

#include "mjcons/matrix_io.hpp"
#include "mjcons/rng.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace mjcons::config {

namespace fs = std::filesystem;

namespace {

struct RawConfig {
  std::map<std::string, std::vector<std::string>> entries;
  fs::path base_dir;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  const std::vector<std::string>& list(const std::string& key) const {
    return entries.at(key);
  }
  std::string one(const std::string& key) const {
    const auto& v = entries.at(key);
    if (v.size() != 1) throw ConfigError("'" + key + "' expects a single value");
    return v.front();
  }
  double number(const std::string& key) const {
    try {
      return std::stod(one(key));
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' is not a number");
    }
  }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) {
      try {
        out.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw ConfigError("'" + key + "' contains a non-numeric entry '" + s + "'");
      }
    }
    return out;
  }
  std::string path(const std::string& key) const {
    const fs::path p(one(key));
    return (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  }
  bool flag(const std::string& key) const {
    const std::string v = one(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' must be true or false");
  }
};

const char* const kKnownKeys[] = {
    "plant.a", "plant.b", "plant.c1", "plant.c2", "plant.d", "plant.r",
    "topology.adjacency", "markov.generator",
    "synthesis.kind", "synthesis.gamma", "synthesis.rho_grid", "synthesis.tau",
    "reduced.f_eigenvalues", "reduced.f_matrix", "reduced.g_matrix", "reduced.g_seed",
    "sim.t_end", "sim.dt", "sim.n_paths", "sim.seed", "sim.disturbance",
    "sim.square.amplitude", "sim.square.period", "sim.square.phase",
    "sim.x0", "sim.x0_file", "sim.x0_seed", "sim.x0_scale",
    "sim.observer0", "sim.observer0_file", "sim.observer_feedthrough",
    "sim.consensus_threshold", "sim.csv_paths"};

RawConfig read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RawConfig raw;
  raw.base_dir = fs::absolute(fs::path(path)).parent_path();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::istringstream ks(line.substr(0, eq));
    std::string key;
    ks >> key;
    std::string rest;
    if (ks >> rest) throw ConfigError(path + ":" + std::to_string(lineno) + ": bad key");
    std::istringstream vs(line.substr(eq + 1));
    std::vector<std::string> values;
    std::string tok;
    while (vs >> tok) values.push_back(tok);
    if (key.empty() || values.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key or value");
    bool known = false;
    for (const char* k : kKnownKeys)
      if (key == k) known = true;
    if (!known) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    raw.entries[key] = std::move(values);
  }
  return raw;
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  const RawConfig raw = read_raw(path);
  RunConfig cfg;

  for (const char* key : {"plant.a", "plant.b", "plant.c1", "plant.c2", "plant.d",
                          "topology.adjacency", "markov.generator", "synthesis.gamma"})
    if (!raw.has(key)) throw ConfigError(std::string("missing required key '") + key + "'");

  cfg.plant_a = raw.path("plant.a");
  cfg.plant_b = raw.path("plant.b");
  cfg.plant_c1 = raw.path("plant.c1");
  cfg.plant_c2 = raw.path("plant.c2");
  cfg.plant_d = raw.path("plant.d");
  if (raw.has("plant.r")) cfg.plant_r = raw.path("plant.r");
  for (const auto& rel : raw.list("topology.adjacency")) {
    const fs::path p(rel);
    cfg.topology_adjacency.push_back(
        (p.is_absolute() ? p : raw.base_dir / p).lexically_normal().string());
  }
  cfg.markov_generator = raw.path("markov.generator");

  if (raw.has("synthesis.kind")) cfg.kind = raw.one("synthesis.kind");
  if (cfg.kind != "full" && cfg.kind != "reduced")
    throw ConfigError("synthesis.kind must be 'full' or 'reduced'");
  cfg.gamma = raw.number("synthesis.gamma");
  if (cfg.gamma <= 0.0) throw ConfigError("synthesis.gamma must be positive");
  if (raw.has("synthesis.rho_grid")) cfg.rho_grid = raw.numbers("synthesis.rho_grid");
  if (raw.has("synthesis.tau")) cfg.tau_override = raw.number("synthesis.tau");

  if (raw.has("reduced.f_eigenvalues")) cfg.reduced_f_eigenvalues = raw.numbers("reduced.f_eigenvalues");
  if (raw.has("reduced.f_matrix")) cfg.reduced_f_matrix = raw.path("reduced.f_matrix");
  if (raw.has("reduced.g_matrix")) cfg.reduced_g_matrix = raw.path("reduced.g_matrix");
  if (raw.has("reduced.g_seed"))
    cfg.reduced_g_seed = static_cast<std::uint64_t>(raw.number("reduced.g_seed"));

  if (raw.has("sim.t_end")) cfg.t_end = raw.number("sim.t_end");
  if (raw.has("sim.dt")) cfg.dt = raw.number("sim.dt");
  if (raw.has("sim.n_paths")) cfg.n_paths = static_cast<int>(raw.number("sim.n_paths"));
  if (raw.has("sim.seed")) cfg.seed = static_cast<std::uint64_t>(raw.number("sim.seed"));
  if (cfg.t_end <= 0.0 || cfg.dt <= 0.0 || cfg.n_paths < 1)
    throw ConfigError("sim.t_end, sim.dt must be positive and sim.n_paths >= 1");
  if (raw.has("sim.disturbance")) cfg.disturbance = raw.one("sim.disturbance");
  if (cfg.disturbance != "zero" && cfg.disturbance != "square")
    throw ConfigError("sim.disturbance must be 'zero' or 'square'");
  if (raw.has("sim.square.amplitude")) cfg.square_amplitude = raw.numbers("sim.square.amplitude");
  if (raw.has("sim.square.period")) cfg.square_period = raw.number("sim.square.period");
  if (raw.has("sim.square.phase")) cfg.square_phase = raw.number("sim.square.phase");
  if (raw.has("sim.x0")) cfg.x0_mode = raw.one("sim.x0");
  if (cfg.x0_mode != "random" && cfg.x0_mode != "file")
    throw ConfigError("sim.x0 must be 'random' or 'file'");
  if (raw.has("sim.x0_file")) cfg.x0_file = raw.path("sim.x0_file");
  if (raw.has("sim.x0_seed")) cfg.x0_seed = static_cast<std::uint64_t>(raw.number("sim.x0_seed"));
  if (raw.has("sim.x0_scale")) cfg.x0_scale = raw.number("sim.x0_scale");
  if (raw.has("sim.observer0")) cfg.observer0_mode = raw.one("sim.observer0");
  if (cfg.observer0_mode != "zero" && cfg.observer0_mode != "file")
    throw ConfigError("sim.observer0 must be 'zero' or 'file'");
  if (raw.has("sim.observer0_file")) cfg.observer0_file = raw.path("sim.observer0_file");
  if (raw.has("sim.observer_feedthrough"))
    cfg.observer_feedthrough = raw.flag("sim.observer_feedthrough");
  if (raw.has("sim.consensus_threshold"))
    cfg.consensus_threshold = raw.number("sim.consensus_threshold");
  if (raw.has("sim.csv_paths")) cfg.csv_paths = static_cast<int>(raw.number("sim.csv_paths"));
  return cfg;
}

synth::Plant RunConfig::plant() const {
  synth::Plant p;
  p.a = io::read_matrix(plant_a);
  p.b = io::read_matrix(plant_b);
  p.c1 = io::read_matrix(plant_c1);
  p.c2 = io::read_matrix(plant_c2);
  p.d = io::read_matrix(plant_d);
  p.r_weight = plant_r.empty() ? Eigen::MatrixXd::Identity(p.a.rows(), p.a.cols())
                               : io::read_matrix(plant_r);
  p.validate();
  return p;
}

graphs::TopologyEnsemble RunConfig::topologies() const {
  std::vector<graphs::Digraph> gs;
  gs.reserve(topology_adjacency.size());
  for (const auto& path : topology_adjacency) gs.emplace_back(io::read_matrix(path));
  return graphs::TopologyEnsemble(std::move(gs));
}

markov::MarkovGenerator RunConfig::generator() const {
  return markov::MarkovGenerator(io::read_matrix(markov_generator));
}

sim::DisturbanceSpec RunConfig::disturbance_spec(int channels) const {
  if (disturbance == "zero") return sim::DisturbanceSpec::zero();
  Eigen::VectorXd amp(channels);
  if (static_cast<int>(square_amplitude.size()) == channels) {
    for (int i = 0; i < channels; ++i) amp(i) = square_amplitude[static_cast<std::size_t>(i)];
  } else if (square_amplitude.size() == 1) {
    amp.setConstant(square_amplitude.front());
  } else {
    throw ConfigError("sim.square.amplitude needs 1 or l entries");
  }
  return sim::DisturbanceSpec::square_wave(amp, square_period, square_phase);
}

Eigen::VectorXd RunConfig::initial_states(int n_agents, int state_dim) const {
  if (x0_mode == "file") {
    const Eigen::MatrixXd m = io::read_matrix(x0_file);
    if (m.rows() != n_agents || m.cols() != state_dim)
      throw ConfigError("sim.x0_file must be an N x n matrix (one row per agent)");
    Eigen::VectorXd x0(n_agents * state_dim);
    for (int i = 0; i < n_agents; ++i) x0.segment(i * state_dim, state_dim) = m.row(i);
    return x0;
  }
  rng::Stream stream(x0_seed);
  Eigen::VectorXd x0(n_agents * state_dim);
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = stream.uniform(-x0_scale, x0_scale);
  return x0;
}

Eigen::VectorXd RunConfig::initial_observer(int n_agents, int observer_dim) const {
  if (observer0_mode == "file") {
    const Eigen::MatrixXd m = io::read_matrix(observer0_file);
    if (m.rows() != n_agents || m.cols() != observer_dim)
      throw ConfigError("sim.observer0_file must be an N x dim matrix");
    Eigen::VectorXd v(n_agents * observer_dim);
    for (int i = 0; i < n_agents; ++i) v.segment(i * observer_dim, observer_dim) = m.row(i);
    return v;
  }
  return Eigen::VectorXd::Zero(n_agents * observer_dim);
}

synth::FullOrderOptions RunConfig::full_order_options() const {
  synth::FullOrderOptions opts;
  opts.rho_grid = rho_grid;
  opts.tau_override = tau_override;
  return opts;
}

synth::ReducedOrderOptions RunConfig::reduced_order_options() const {
  synth::ReducedOrderOptions opts;
  opts.rho_grid = rho_grid;
  opts.tau_override = tau_override;
  opts.f_bar_eigenvalues = reduced_f_eigenvalues;
  if (!reduced_f_matrix.empty()) opts.f_bar_matrix = io::read_matrix(reduced_f_matrix);
  if (!reduced_g_matrix.empty()) opts.g_matrix = io::read_matrix(reduced_g_matrix);
  opts.g_seed = reduced_g_seed;
  return opts;
}

void write_effective_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << "plant.a = " << cfg.plant_a << "\n";
  out << "plant.b = " << cfg.plant_b << "\n";
  out << "plant.c1 = " << cfg.plant_c1 << "\n";
  out << "plant.c2 = " << cfg.plant_c2 << "\n";
  out << "plant.d = " << cfg.plant_d << "\n";
  if (!cfg.plant_r.empty()) out << "plant.r = " << cfg.plant_r << "\n";
  out << "topology.adjacency =";
  for (const auto& p : cfg.topology_adjacency) out << " " << p;
  out << "\n";
  out << "markov.generator = " << cfg.markov_generator << "\n";
  out << "synthesis.kind = " << cfg.kind << "\n";
  out << "synthesis.gamma = " << io::format_double(cfg.gamma) << "\n";
  out << "synthesis.rho_grid =";
  for (double r : cfg.rho_grid) out << " " << io::format_double(r);
  out << "\n";
  if (cfg.tau_override) out << "synthesis.tau = " << io::format_double(*cfg.tau_override) << "\n";
  if (!cfg.reduced_f_eigenvalues.empty()) {
    out << "reduced.f_eigenvalues =";
    for (double e : cfg.reduced_f_eigenvalues) out << " " << io::format_double(e);
    out << "\n";
  }
  if (!cfg.reduced_f_matrix.empty()) out << "reduced.f_matrix = " << cfg.reduced_f_matrix << "\n";
  if (!cfg.reduced_g_matrix.empty()) out << "reduced.g_matrix = " << cfg.reduced_g_matrix << "\n";
  out << "reduced.g_seed = " << cfg.reduced_g_seed << "\n";
  out << "sim.t_end = " << io::format_double(cfg.t_end) << "\n";
  out << "sim.dt = " << io::format_double(cfg.dt) << "\n";
  out << "sim.n_paths = " << cfg.n_paths << "\n";
  out << "sim.seed = " << cfg.seed << "\n";
  out << "sim.disturbance = " << cfg.disturbance << "\n";
  out << "sim.square.amplitude =";
  for (double a : cfg.square_amplitude) out << " " << io::format_double(a);
  out << "\n";
  out << "sim.square.period = " << io::format_double(cfg.square_period) << "\n";
  out << "sim.square.phase = " << io::format_double(cfg.square_phase) << "\n";
  out << "sim.x0 = " << cfg.x0_mode << "\n";
  if (!cfg.x0_file.empty()) out << "sim.x0_file = " << cfg.x0_file << "\n";
  out << "sim.x0_seed = " << cfg.x0_seed << "\n";
  out << "sim.x0_scale = " << io::format_double(cfg.x0_scale) << "\n";
  out << "sim.observer0 = " << cfg.observer0_mode << "\n";
  if (!cfg.observer0_file.empty()) out << "sim.observer0_file = " << cfg.observer0_file << "\n";
  out << "sim.observer_feedthrough = " << (cfg.observer_feedthrough ? "true" : "false") << "\n";
  out << "sim.consensus_threshold = " << io::format_double(cfg.consensus_threshold) << "\n";
  out << "sim.csv_paths = " << cfg.csv_paths << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace mjcons::config
