#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace mjcons::matops {

struct MatopsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSymmetricError : MatopsError {
  using MatopsError::MatopsError;
};
struct NotPositiveDefiniteError : MatopsError {
  using MatopsError::MatopsError;
};
struct SharedEigenvaluesError : MatopsError {
  using MatopsError::MatopsError;
};
struct SingularSystemError : MatopsError {
  using MatopsError::MatopsError;
};

// Solves T A - F T = rhs for T (k x n, with A n x n and F k x k) through the
// Kronecker-vectorized linear system (A^T (x) I_k - I_n (x) F) vec(T) = vec(rhs).
// A and F must have disjoint spectra. Fine for the small n used here; not a
// Schur-based large-scale solver.
Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f,
                                const Eigen::MatrixXd& rhs);

// Cholesky-based test; m must be symmetric within 1e-10 relative.
bool is_positive_definite(const Eigen::MatrixXd& m);

// Evaluates 2 p^T q <= p^T Phi p + q^T Phi^{-1} q for positive-definite Phi.
// Mathematically always true; used as a randomized test oracle.
bool young_bound_holds(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                       const Eigen::MatrixXd& phi);

// max eigenvalue of the symmetrized matrix.
double max_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace mjcons::matops
