#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mjcons::markov {

struct GeneratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NegativeOffDiagonalError : GeneratorError {
  using GeneratorError::GeneratorError;
};
struct RowSumNonzeroError : GeneratorError {
  using GeneratorError::GeneratorError;
};
struct NotErgodicError : GeneratorError {
  using GeneratorError::GeneratorError;
};

// Transition-rate matrix of a continuous-time Markov chain: off-diagonal
// entries nonnegative, every row sums to zero.
class MarkovGenerator {
 public:
  explicit MarkovGenerator(Eigen::MatrixXd q);

  int state_count() const { return static_cast<int>(q_.rows()); }
  const Eigen::MatrixXd& rates() const { return q_; }

 private:
  Eigen::MatrixXd q_;
};

struct StationaryDistribution {
  Eigen::VectorXd pi;
  double pi_bar;  // min_i pi_i
};

// True iff the directed graph on states with edges where q(i, j) > 0 is
// strongly connected.
bool is_ergodic(const MarkovGenerator& g);

// Solves pi^T Q = 0, sum(pi) = 1 as a least-squares system. Throws
// NotErgodicError for reducible chains.
StationaryDistribution stationary_distribution(const MarkovGenerator& g);

// Piecewise-constant right-continuous switching signal. states[k] is held on
// [jump_times[k], jump_times[k+1]), the last state up to end_time.
struct SwitchingPath {
  std::vector<double> jump_times;  // jump_times[0] == 0
  std::vector<int> states;         // 0-based state indices
  double end_time = 0.0;

  int state_at(double t) const;
};

// Holding time in state i is exponential with rate -q(i,i) (infinite when
// q(i,i) == 0); the next state is j != i with probability q(i,j) / -q(i,i).
// Deterministic for a fixed seed.
SwitchingPath sample_path(const MarkovGenerator& g, int initial_state, double t_end,
                          std::uint64_t seed);

int sample_state(const StationaryDistribution& d, std::uint64_t seed);

}  // namespace mjcons::markov
