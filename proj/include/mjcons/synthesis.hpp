#pragma once

#include "mjcons/graphs.hpp"
#include "mjcons/lmi.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mjcons::synth {

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularStackError : SynthesisError {
  using SynthesisError::SynthesisError;
};

// Identical-agent dynamics x' = A x + B u + D w, measured output y = C1 x,
// performance output C2 (applied to the consensus error), and the
// positive-definite initial-condition weight R.
struct Plant {
  Eigen::MatrixXd a, b, c1, c2, d, r_weight;

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(b.cols()); }
  int q1() const { return static_cast<int>(c1.rows()); }
  int q2() const { return static_cast<int>(c2.rows()); }
  int l() const { return static_cast<int>(d.cols()); }

  void validate() const;  // throws SynthesisError on inconsistent dimensions
};

// PBH rank tests on every eigenvalue of A with nonnegative real part.
bool check_stabilizable_detectable(const Plant& p);

struct FullOrderProtocol {
  Eigen::MatrixXd k_gain;  // m x n,  K = B^T P1^{-1}
  Eigen::MatrixXd l_gain;  // n x q1, L = P2^{-1} Y
  double tau = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
  // certificates
  Eigen::MatrixXd p1, p2;  // n x n positive definite
  Eigen::MatrixXd y;       // n x q1
  double r1 = 0.0, r2 = 0.0;
};

struct ReducedOrderProtocol {
  Eigen::MatrixXd f_bar;   // (n-q1) x (n-q1), Hurwitz, spectrum disjoint from A
  Eigen::MatrixXd g_gain;  // (n-q1) x q1
  Eigen::MatrixXd t_map;   // (n-q1) x n, solves T A - F T = G C1
  Eigen::MatrixXd q1_map;  // n x q1
  Eigen::MatrixXd q2_map;  // n x (n-q1), [Q1 Q2] = [C1; T]^{-1}
  Eigen::MatrixXd k_gain;  // m x n
  double tau = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
  Eigen::MatrixXd p1;  // n x n
  Eigen::MatrixXd p2;  // (n-q1) x (n-q1)
  double r1 = 0.0, r2 = 0.0;

  int observer_dim() const { return static_cast<int>(f_bar.rows()); }
};

struct CertificateReport {
  double sigma1_max_eig = 0.0;
  double sigma2_max_eig = 0.0;
  bool trace_cond_p1 = false;
  bool trace_cond_p2 = false;
  double tau_lower = 0.0;
  double tau_upper = 0.0;
  bool tau_in_interval = false;
  bool gains_consistent = false;  // K (and L) reconstruct from the certificates
  // reduced-order extras; neutral values for the full-order report
  double sylvester_residual = 0.0;
  double identity_residual = 0.0;
  double stack_condition = 0.0;
  bool observer_structure_ok = true;
  bool passed = false;
  std::string details;
};

struct FullOrderOptions {
  std::vector<double> rho_grid{0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  std::optional<double> tau_override;
  lmi::SolverOptions solver;
};

struct ReducedOrderOptions {
  std::vector<double> rho_grid{0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  std::optional<double> tau_override;
  lmi::SolverOptions solver;
  // Observer realization: explicit F matrix wins, otherwise a companion form
  // realizing the given eigenvalues.
  Eigen::MatrixXd f_bar_matrix;            // empty = use eigenvalues
  std::vector<double> f_bar_eigenvalues;
  Eigen::MatrixXd g_matrix;                // empty = sample uniform(0,1) entries
  std::uint64_t g_seed = 1u;
  int g_resample_limit = 20;
};

struct FullOrderOutcome {
  bool feasible = false;
  std::optional<FullOrderProtocol> protocol;
  std::string log;  // per-rho diagnostics
};

struct ReducedOrderOutcome {
  bool feasible = false;
  std::optional<ReducedOrderProtocol> protocol;
  std::string log;
};

FullOrderOutcome synthesize_full_order(const Plant& p, const graphs::SpectralConstants& sc,
                                       double pi_bar, double gamma,
                                       const FullOrderOptions& opts = {});

// Reconstructs the closed-loop certificate matrices from the protocol fields
// and re-checks every inequality by dense symmetric eigensolves.
CertificateReport verify_full_order(const FullOrderProtocol& proto, const Plant& p,
                                    const graphs::SpectralConstants& sc, double pi_bar);

ReducedOrderOutcome synthesize_reduced_order(const Plant& p, const graphs::SpectralConstants& sc,
                                             double pi_bar, double gamma,
                                             const ReducedOrderOptions& opts = {});

CertificateReport reduced_certificates(const ReducedOrderProtocol& proto, const Plant& p,
                                       const graphs::SpectralConstants& sc, double pi_bar);

// Companion matrix whose characteristic polynomial has the given (real) roots.
Eigen::MatrixXd companion_from_eigenvalues(const std::vector<double>& eigenvalues);

std::string describe(const CertificateReport& rep);

}  // namespace mjcons::synth
