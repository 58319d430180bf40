#pragma once

#include <Eigen/Dense>

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

namespace mjcons::lmi {

struct LmiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatchError : LmiError {
  using LmiError::LmiError;
};

class Problem;

struct ScalarVar {
  int id = -1;
};
struct MatrixVar {
  int id = -1;
};

enum class Sense { NegativeDefinite, PositiveDefinite };

// Affine symmetric-matrix-valued function of the problem's decision
// variables: a constant block, a coefficient block per scalar variable, and
// structured placements of the matrix variables.
class AffineMatrixExpr {
 public:
  int dim() const { return dim_; }

  void add_constant(const Eigen::MatrixXd& m);
  void add_scalar_term(ScalarVar v, const Eigen::MatrixXd& coeff);
  // Adds left * V * right^T + right * V^T * left^T.
  void add_matrix_term(MatrixVar v, const Eigen::MatrixXd& left, const Eigen::MatrixXd& right);
  // Adds scale * m * V * m^T for a symmetric variable V.
  void add_congruence(MatrixVar v, const Eigen::MatrixXd& m, double scale = 1.0);
  // Adds trace(weight^T V) * coeff.
  void add_trace_term(MatrixVar v, const Eigen::MatrixXd& weight, const Eigen::MatrixXd& coeff);

  // Value of the expression as declared (no sign or scale normalization).
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& slots) const;

 private:
  friend class Problem;
  friend class Solver;
  AffineMatrixExpr(Problem* owner, int dim, Sense sense, std::string label);

  struct MatrixTerm {
    int var;
    Eigen::MatrixXd left, right;  // for traces: left = weight, right = coeff
    double scale;
    enum class Kind { Pair, Congruence, Trace } kind;
  };

  Problem* owner_;
  int dim_;
  Sense sense_;
  std::string label_;
  Eigen::MatrixXd constant_;
  std::vector<std::pair<int, Eigen::MatrixXd>> scalar_terms_;  // var id -> coefficient
  std::vector<MatrixTerm> matrix_terms_;
};

// Strict-feasibility problem: every constraint expr is required negative
// definite (or positive definite) with a relative margin.
class Problem {
 public:
  ScalarVar add_scalar(std::string name);
  MatrixVar add_symmetric(std::string name, int dim);
  MatrixVar add_rectangular(std::string name, int rows, int cols);

  AffineMatrixExpr& add_constraint(int dim, Sense sense, std::string label);

  int slot_count() const { return slot_count_; }
  int constraint_count() const { return static_cast<int>(constraints_.size()); }
  const AffineMatrixExpr& constraint(int i) const { return constraints_[static_cast<std::size_t>(i)]; }
  const std::string& constraint_label(int i) const {
    return constraints_[static_cast<std::size_t>(i)].label_;
  }

  double scalar_value(const Eigen::VectorXd& slots, ScalarVar v) const;
  Eigen::MatrixXd matrix_value(const Eigen::VectorXd& slots, MatrixVar v) const;
  // Warm-start helpers: write a value into the slot vector.
  void set_scalar(Eigen::VectorXd& slots, ScalarVar v, double value) const;
  void set_matrix(Eigen::VectorXd& slots, MatrixVar v, const Eigen::MatrixXd& value) const;

 private:
  friend class AffineMatrixExpr;
  friend class Solver;

  struct VarInfo {
    std::string name;
    bool symmetric;  // meaningful for matrices
    bool is_matrix;
    int rows, cols;
    int slot_offset;
    int slot_size;
  };

  const VarInfo& var(int id) const { return vars_[static_cast<std::size_t>(id)]; }

  std::vector<VarInfo> vars_;
  std::deque<AffineMatrixExpr> constraints_;  // deque: references stay valid
  int slot_count_ = 0;
};

enum class Status { Feasible, Infeasible, MaxIterations };

struct SolverOptions {
  double margin = 1e-7;              // relative margin epsilon
  double deep_margin_factor = 1e3;   // stop early once this deep inside
  int max_outer = 64;
  int max_newton = 120;
  double eta0 = 1.0;
  double eta_growth = 8.0;
  double var_bound = 1e7;  // box |x_k| < var_bound keeps centering bounded
};

struct Result {
  Status status = Status::MaxIterations;
  Eigen::VectorXd slots;
  // max over constraints of lambda_max of the sign- and scale-normalized
  // constraint; Feasible implies worst_eigenvalue <= -margin.
  double worst_eigenvalue = 0.0;
  int newton_iterations = 0;
  std::string diagnostics;

  bool feasible() const { return status == Status::Feasible; }
};

// Minimizes the worst normalized constraint eigenvalue by a log-det barrier
// descent on the epigraph formulation, stopping once the requested margin is
// certified (or certified unreachable).
Result solve_feasibility(const Problem& p, const SolverOptions& opts = {});

// Independent check: per-constraint max eigenvalue of the sign/scale
// normalized constraints at the given point, via a dense symmetric
// eigensolve (no solver internals).
std::vector<double> normalized_constraint_eigenvalues(const Problem& p,
                                                      const Eigen::VectorXd& slots);

}  // namespace mjcons::lmi
