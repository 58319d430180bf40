#include "mjcons/markov.hpp"

#include "mjcons/rng.hpp"

#include <algorithm>
#include <queue>

namespace mjcons::markov {

MarkovGenerator::MarkovGenerator(Eigen::MatrixXd q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() < 1)
    throw GeneratorError("generator must be square and non-empty");
  const double scale = q_.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, scale);
  for (Eigen::Index i = 0; i < q_.rows(); ++i) {
    for (Eigen::Index j = 0; j < q_.cols(); ++j)
      if (i != j && q_(i, j) < 0.0)
        throw NegativeOffDiagonalError("negative off-diagonal rate at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
    const double row_sum = q_.row(i).sum();
    if (std::abs(row_sum) > tol)
      throw RowSumNonzeroError("row " + std::to_string(i) + " sums to " +
                               std::to_string(row_sum) + ", expected 0");
  }
}

namespace {

std::vector<char> reachable(const Eigen::MatrixXd& q, int start, bool reversed) {
  const int s = static_cast<int>(q.rows());
  std::vector<char> seen(static_cast<std::size_t>(s), 0);
  std::queue<int> work;
  work.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  while (!work.empty()) {
    const int u = work.front();
    work.pop();
    for (int v = 0; v < s; ++v) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      const double rate = reversed ? q(v, u) : q(u, v);
      if (v != u && rate > 0.0) {
        seen[static_cast<std::size_t>(v)] = 1;
        work.push(v);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_ergodic(const MarkovGenerator& g) {
  const Eigen::MatrixXd& q = g.rates();
  const auto fwd = reachable(q, 0, false);
  const auto bwd = reachable(q, 0, true);
  for (char c : fwd)
    if (!c) return false;
  for (char c : bwd)
    if (!c) return false;
  return true;
}

StationaryDistribution stationary_distribution(const MarkovGenerator& g) {
  if (!is_ergodic(g)) throw NotErgodicError("generator is not ergodic");
  const int s = g.state_count();
  Eigen::MatrixXd lhs(s + 1, s);
  lhs.topRows(s) = g.rates().transpose();
  lhs.row(s).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs(s) = 1.0;
  StationaryDistribution d;
  d.pi = lhs.colPivHouseholderQr().solve(rhs);
  // Squash round-off negatives and renormalize.
  d.pi = d.pi.cwiseMax(0.0);
  d.pi /= d.pi.sum();
  d.pi_bar = d.pi.minCoeff();
  return d;
}

int SwitchingPath::state_at(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(jump_times.begin(), it)) - 1;
  return states[std::min(idx, states.size() - 1)];
}

SwitchingPath sample_path(const MarkovGenerator& g, int initial_state, double t_end,
                          std::uint64_t seed) {
  if (t_end <= 0.0) throw GeneratorError("t_end must be positive");
  if (initial_state < 0 || initial_state >= g.state_count())
    throw GeneratorError("initial state out of range");
  const Eigen::MatrixXd& q = g.rates();
  rng::Stream stream(seed);
  SwitchingPath path;
  path.end_time = t_end;
  path.jump_times.push_back(0.0);
  path.states.push_back(initial_state);
  double t = 0.0;
  int state = initial_state;
  while (true) {
    const double exit_rate = -q(state, state);
    if (exit_rate <= 0.0) break;  // absorbing in the degenerate sense: never leaves
    t += stream.exponential(exit_rate);
    if (t >= t_end) break;
    // Pick the next state proportionally to the outgoing rates.
    double u = stream.uniform01() * exit_rate;
    int next = -1;
    for (int j = 0; j < g.state_count(); ++j) {
      if (j == state) continue;
      u -= q(state, j);
      if (u <= 0.0) {
        next = j;
        break;
      }
    }
    if (next < 0) {  // round-off spill: take the last state with positive rate
      for (int j = g.state_count() - 1; j >= 0; --j) {
        if (j != state && q(state, j) > 0.0) {
          next = j;
          break;
        }
      }
    }
    path.jump_times.push_back(t);
    path.states.push_back(next);
    state = next;
  }
  return path;
}

int sample_state(const StationaryDistribution& d, std::uint64_t seed) {
  rng::Stream stream(seed);
  double u = stream.uniform01();
  for (int i = 0; i < d.pi.size(); ++i) {
    u -= d.pi(i);
    if (u <= 0.0) return i;
  }
  return static_cast<int>(d.pi.size()) - 1;
}

}  // namespace mjcons::markov
