#include "mjcons/synthesis.hpp"

#include "mjcons/matops.hpp"
#include "mjcons/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace mjcons::synth {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd embed(int total_rows, int row_offset, const MatrixXd& local) {
  MatrixXd out = MatrixXd::Zero(total_rows, local.cols());
  out.block(row_offset, 0, local.rows(), local.cols()) = local;
  return out;
}

MatrixXd pd_inverse(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success)
    throw SynthesisError(std::string(what) + " is not positive definite");
  MatrixXd inv = llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

bool rank_deficient(const Eigen::MatrixXcd& m, Eigen::Index want_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-8 * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return rank < want_rank;
}

}  // namespace

void Plant::validate() const {
  const int nn = n();
  if (a.rows() != nn || a.cols() != nn || nn < 1) throw SynthesisError("A must be square");
  if (b.rows() != nn || b.cols() < 1) throw SynthesisError("B has wrong dimensions");
  if (c1.cols() != nn || c1.rows() < 1) throw SynthesisError("C1 has wrong dimensions");
  if (c2.cols() != nn || c2.rows() < 1) throw SynthesisError("C2 has wrong dimensions");
  if (d.rows() != nn || d.cols() < 1) throw SynthesisError("D has wrong dimensions");
  if (r_weight.rows() != nn || r_weight.cols() != nn)
    throw SynthesisError("R has wrong dimensions");
  if (!matops::is_positive_definite(r_weight))
    throw SynthesisError("R must be positive definite");
}

bool check_stabilizable_detectable(const Plant& p) {
  const int n = p.n();
  const Eigen::EigenSolver<MatrixXd> es(p.a);
  const Eigen::VectorXcd eigs = es.eigenvalues();
  const double scale = std::max(1.0, p.a.cwiseAbs().maxCoeff());
  const Eigen::MatrixXcd a_c = p.a.cast<std::complex<double>>();
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i).real() < -1e-9 * scale) continue;
    Eigen::MatrixXcd pbh_b(n, n + p.m());
    pbh_b << eigs(i) * Eigen::MatrixXcd::Identity(n, n) - a_c, p.b.cast<std::complex<double>>();
    if (rank_deficient(pbh_b, n)) return false;
    Eigen::MatrixXcd pbh_c(n, n + p.q1());
    pbh_c << std::conj(eigs(i)) * Eigen::MatrixXcd::Identity(n, n) - a_c.adjoint(),
        p.c1.transpose().cast<std::complex<double>>();
    if (rank_deficient(pbh_c, n)) return false;
  }
  return true;
}

namespace {

struct Step1Solution {
  bool ok = false;
  MatrixXd p1;
  double r1 = 0.0;
  double trace_x = 0.0;
  double worst = 0.0;
};

// Shared by both algorithms: the "P1 step" differs only in the main block
// and in the lower bound [[f_low * R, I], [I, P1]] > 0. The builder callback
// fills the main constraint given the problem and the P1 / r1 handles.
template <typename MainBuilder>
Step1Solution p1_step(const Plant& plant, double gamma_sq_over_kappa_factor,
                      const MainBuilder& build_main, std::optional<double> r1_cap,
                      std::optional<double> trace_bound, const lmi::SolverOptions& sopts) {
  const int n = plant.n();
  lmi::Problem prob;
  const lmi::MatrixVar p1 = prob.add_symmetric("P1", n);
  const lmi::MatrixVar x = prob.add_symmetric("X", n);
  const lmi::ScalarVar r1 = prob.add_scalar("r1");

  build_main(prob, p1, r1);

  // [[f * R, I], [I, P1]] > 0  (f = gamma^2/(2 kappa) or gamma^2/kappa)
  {
    auto& c = prob.add_constraint(2 * n, lmi::Sense::PositiveDefinite, "p1-lower-bound");
    MatrixXd m0 = MatrixXd::Zero(2 * n, 2 * n);
    m0.topLeftCorner(n, n) = gamma_sq_over_kappa_factor * plant.r_weight;
    m0.topRightCorner(n, n).setIdentity();
    m0.bottomLeftCorner(n, n).setIdentity();
    c.add_constant(m0);
    c.add_congruence(p1, embed(2 * n, n, MatrixXd::Identity(n, n)));
  }
  // [[X, I], [I, P1]] >= 0 makes X an upper bound for P1^{-1}; bounding
  // trace(X) steers the step toward large P1, which is what the later step
  // needs (it penalizes P1^{-1} B B^T P1^{-1}).
  {
    auto& c = prob.add_constraint(2 * n, lmi::Sense::PositiveDefinite, "inverse-bound");
    MatrixXd m0 = MatrixXd::Zero(2 * n, 2 * n);
    m0.topRightCorner(n, n).setIdentity();
    m0.bottomLeftCorner(n, n).setIdentity();
    c.add_constant(m0);
    c.add_congruence(x, embed(2 * n, 0, MatrixXd::Identity(n, n)));
    c.add_congruence(p1, embed(2 * n, n, MatrixXd::Identity(n, n)));
  }
  {
    auto& c = prob.add_constraint(1, lmi::Sense::PositiveDefinite, "r1-positive");
    c.add_scalar_term(r1, MatrixXd::Ones(1, 1));
  }
  if (r1_cap) {
    auto& c = prob.add_constraint(1, lmi::Sense::NegativeDefinite, "r1-cap");
    c.add_constant(-*r1_cap * MatrixXd::Ones(1, 1));
    c.add_scalar_term(r1, MatrixXd::Ones(1, 1));
  }
  if (trace_bound) {
    auto& c = prob.add_constraint(1, lmi::Sense::NegativeDefinite, "trace-bound");
    c.add_constant(-*trace_bound * MatrixXd::Ones(1, 1));
    c.add_trace_term(x, MatrixXd::Identity(n, n), MatrixXd::Ones(1, 1));
  }

  const lmi::Result res = lmi::solve_feasibility(prob, sopts);
  Step1Solution sol;
  sol.ok = res.feasible();
  sol.worst = res.worst_eigenvalue;
  if (sol.ok) {
    sol.p1 = prob.matrix_value(res.slots, p1);
    sol.r1 = prob.scalar_value(res.slots, r1);
    sol.trace_x = prob.matrix_value(res.slots, x).trace();
  }
  return sol;
}

// Shrink trace(X) geometrically to push P1 up. Keeps the last feasible
// solution; a handful of probes is enough for the tau interval to open.
template <typename SolveFn>
Step1Solution minimize_inverse_trace(const SolveFn& solve, Step1Solution base, int max_probes,
                                     std::ostringstream& log) {
  double hi = base.trace_x;
  double lo = 0.0;
  Step1Solution best = std::move(base);
  for (int it = 0; it < max_probes; ++it) {
    const double c = lo > 0.0 ? std::sqrt(lo * hi) : hi / 16.0;
    Step1Solution trial = solve(c);
    if (trial.ok) {
      best = std::move(trial);
      hi = c;
    } else {
      lo = c;
    }
    if (lo > 0.0 && hi / lo < 1.3) break;
  }
  log << "    trace(X) tightened to " << hi << "\n";
  return best;
}

// Smallest r1 the P1 step admits, found by shrinking an r1 cap. Sets the
// scale for the tau interval when no coupling gain was requested.
template <typename SolveFn>
std::optional<double> minimal_r1(const SolveFn& solve_with_cap, std::ostringstream& log) {
  Step1Solution base = solve_with_cap(std::nullopt);
  if (!base.ok) return std::nullopt;
  double hi = std::max(base.r1, 1e-12);
  double lo = 0.0;
  for (int it = 0; it < 24; ++it) {
    const double c = lo > 0.0 ? std::sqrt(lo * hi) : hi / 16.0;
    const Step1Solution trial = solve_with_cap(c);
    if (trial.ok) {
      hi = c;
    } else {
      lo = c;
    }
    if (lo > 0.0 && hi / lo < 1.5) break;
  }
  log << "    minimal feasible r1 ~ " << hi << "\n";
  return hi;
}

struct Step2FullSolution {
  bool ok = false;
  MatrixXd p2, y;
  double r2 = 0.0;
};

Step2FullSolution full_step2(const Plant& plant, const MatrixXd& p1_inv, double gamma, double rho,
                             double kappa, std::optional<double> r2_floor,
                             const lmi::SolverOptions& sopts) {
  const int n = plant.n();
  const int l = plant.l();
  const int q1 = plant.q1();
  const MatrixXd w = p1_inv * plant.b * plant.b.transpose() * p1_inv;

  lmi::Problem prob;
  const lmi::MatrixVar p2 = prob.add_symmetric("P2", n);
  const lmi::MatrixVar y = prob.add_rectangular("Y", n, q1);
  const lmi::ScalarVar r2 = prob.add_scalar("r2");

  {
    const int d = n + l + q1;
    auto& c = prob.add_constraint(d, lmi::Sense::NegativeDefinite, "observer-lmi");
    MatrixXd m0 = MatrixXd::Zero(d, d);
    m0.block(n, n, l, l) = -(gamma * gamma / 2.0) * MatrixXd::Identity(l, l);
    m0.block(n + l, n + l, q1, q1) = -(rho / 8.0) * MatrixXd::Identity(q1, q1);
    c.add_constant(m0);
    c.add_scalar_term(r2, embed(d, 0, w) * embed(d, 0, MatrixXd::Identity(n, n)).transpose());
    // A^T P2 + P2 A
    c.add_matrix_term(p2, embed(d, 0, plant.a.transpose()), embed(d, 0, MatrixXd::Identity(n, n)));
    // -P2 D in the (1, 2) block
    c.add_matrix_term(p2, -embed(d, 0, MatrixXd::Identity(n, n)), embed(d, n, plant.d.transpose()));
    // Y C1 + C1^T Y^T in (1, 1), Y in the (1, 3) block
    c.add_matrix_term(y, embed(d, 0, MatrixXd::Identity(n, n)), embed(d, 0, plant.c1.transpose()));
    c.add_matrix_term(y, embed(d, 0, MatrixXd::Identity(n, n)), embed(d, n + l, MatrixXd::Identity(q1, q1)));
  }
  {
    auto& c = prob.add_constraint(n, lmi::Sense::PositiveDefinite, "p2-positive");
    c.add_congruence(p2, MatrixXd::Identity(n, n));
  }
  {
    auto& c = prob.add_constraint(n, lmi::Sense::NegativeDefinite, "p2-upper-bound");
    c.add_constant(-(gamma * gamma / (2.0 * kappa)) * plant.r_weight);
    c.add_congruence(p2, MatrixXd::Identity(n, n));
  }
  {
    auto& c = prob.add_constraint(1, lmi::Sense::PositiveDefinite, "r2-positive");
    c.add_scalar_term(r2, MatrixXd::Ones(1, 1));
  }
  if (r2_floor) {
    auto& c = prob.add_constraint(1, lmi::Sense::PositiveDefinite, "r2-floor");
    c.add_constant(-*r2_floor * MatrixXd::Ones(1, 1));
    c.add_scalar_term(r2, MatrixXd::Ones(1, 1));
  }

  const lmi::Result res = lmi::solve_feasibility(prob, sopts);
  Step2FullSolution sol;
  sol.ok = res.feasible();
  if (sol.ok) {
    sol.p2 = prob.matrix_value(res.slots, p2);
    sol.y = prob.matrix_value(res.slots, y);
    sol.r2 = prob.scalar_value(res.slots, r2);
  }
  return sol;
}

}  // namespace

FullOrderOutcome synthesize_full_order(const Plant& plant, const graphs::SpectralConstants& sc,
                                       double pi_bar, double gamma, const FullOrderOptions& opts) {
  plant.validate();
  if (gamma <= 0.0) throw SynthesisError("gamma must be positive");
  FullOrderOutcome out;
  std::ostringstream log;

  if (!check_stabilizable_detectable(plant)) {
    log << "PBH test failed: (A, B, C1) not stabilizable and detectable\n";
    out.log = log.str();
    return out;
  }

  const int n = plant.n();
  const int l = plant.l();
  const int q1 = plant.q1();
  const int q2 = plant.q2();

  for (const double rho : opts.rho_grid) {
    if (!(rho > 0.0 && rho < 2.0)) {
      log << "rho=" << rho << ": skipped (must lie in (0, 2))\n";
      continue;
    }
    log << "rho=" << rho << ":\n";

    const auto build_main = [&](lmi::Problem& prob, lmi::MatrixVar p1, lmi::ScalarVar r1) {
      const int d = n + l + q1 + q2;
      auto& c = prob.add_constraint(d, lmi::Sense::NegativeDefinite, "state-lmi");
      MatrixXd m0 = MatrixXd::Zero(d, d);
      m0.block(0, n, n, l) = plant.d;
      m0.block(n, 0, l, n) = plant.d.transpose();
      m0.block(n, n, l, l) = -(gamma * gamma / 2.0) * MatrixXd::Identity(l, l);
      m0.block(n + l, n + l, q1, q1) =
          -(1.0 / (rho * (1.0 + pi_bar * pi_bar * sc.lambda_max))) * MatrixXd::Identity(q1, q1);
      m0.block(n + l + q1, n + l + q1, q2, q2) = -MatrixXd::Identity(q2, q2);
      c.add_constant(m0);
      c.add_scalar_term(r1, embed(d, 0, -plant.b) * embed(d, 0, plant.b).transpose());
      c.add_matrix_term(p1, embed(d, 0, plant.a), embed(d, 0, MatrixXd::Identity(n, n)));
      c.add_matrix_term(p1, embed(d, 0, MatrixXd::Identity(n, n)), embed(d, n + l, plant.c1));
      c.add_matrix_term(p1, embed(d, 0, MatrixXd::Identity(n, n)), embed(d, n + l + q1, plant.c2));
    };

    const auto solve_step1 = [&](std::optional<double> r1_cap,
                                 std::optional<double> trace_bound) {
      return p1_step(plant, gamma * gamma / (2.0 * sc.kappa), build_main, r1_cap, trace_bound,
                     opts.solver);
    };

    // Candidate coupling gains: either the requested one, or a few scales
    // above the smallest r1 the step-1 LMIs admit.
    std::vector<double> tau_targets;
    if (opts.tau_override) {
      tau_targets = {*opts.tau_override};
    } else {
      const auto r1_min = minimal_r1(
          [&](std::optional<double> cap) { return solve_step1(cap, std::nullopt); }, log);
      if (!r1_min) {
        log << "    step 1 infeasible\n";
        continue;
      }
      const double lo_min = *r1_min / (2.0 - rho);
      tau_targets = {3.0 * lo_min, 10.0 * lo_min, 30.0 * lo_min};
    }

    for (const double tau_target : tau_targets) {
      const double r1_cap = 0.95 * tau_target * (2.0 - rho);
      Step1Solution s1 = solve_step1(r1_cap, std::nullopt);
      if (!s1.ok) {
        log << "    step 1 infeasible with r1 < " << r1_cap << "\n";
        continue;
      }
      s1 = minimize_inverse_trace([&](double c) { return solve_step1(r1_cap, c); }, std::move(s1),
                                  12, log);
      const MatrixXd p1_inv = pd_inverse(s1.p1, "P1");

      const double r2_floor = 1.05 * 4.0 * tau_target / rho;
      const Step2FullSolution s2 =
          full_step2(plant, p1_inv, gamma, rho, sc.kappa, r2_floor, opts.solver);
      if (!s2.ok) {
        log << "    step 2 infeasible with r2 > " << r2_floor << " (r1=" << s1.r1 << ")\n";
        continue;
      }

      const double tau_lo = s1.r1 / (2.0 - rho);
      const double tau_hi = rho * s2.r2 / 4.0;
      log << "    r1=" << s1.r1 << " r2=" << s2.r2 << " tau interval=(" << tau_lo << ", "
          << tau_hi << ")\n";
      if (!(tau_lo < tau_hi)) {
        log << "    empty tau interval\n";
        continue;
      }
      const double tau = opts.tau_override ? *opts.tau_override : std::sqrt(tau_lo * tau_hi);
      if (!(tau_lo < tau && tau < tau_hi)) {
        log << "    tau " << tau << " not inside the interval\n";
        continue;
      }

      FullOrderProtocol proto;
      proto.k_gain = plant.b.transpose() * p1_inv;
      proto.p2 = s2.p2;
      proto.y = s2.y;
      proto.l_gain = pd_inverse(s2.p2, "P2") * s2.y;
      proto.tau = tau;
      proto.rho = rho;
      proto.gamma = gamma;
      proto.p1 = s1.p1;
      proto.r1 = s1.r1;
      proto.r2 = s2.r2;

      const CertificateReport rep = verify_full_order(proto, plant, sc, pi_bar);
      if (!rep.passed) {
        log << "    certificate verification failed:\n" << describe(rep) << "\n";
        continue;
      }
      log << "    feasible, tau=" << tau << "\n";
      out.feasible = true;
      out.protocol = std::move(proto);
      out.log = log.str();
      return out;
    }
  }
  log << "no rho in the grid produced a verified protocol\n";
  out.log = log.str();
  return out;
}

CertificateReport verify_full_order(const FullOrderProtocol& proto, const Plant& plant,
                                    const graphs::SpectralConstants& sc, double pi_bar) {
  plant.validate();
  const int n = plant.n();
  const int l = plant.l();
  if (proto.p1.rows() != n || proto.p2.rows() != n || proto.k_gain.cols() != n ||
      proto.l_gain.rows() != n)
    throw lmi::DimensionMismatchError("protocol does not match the plant dimensions");

  CertificateReport rep;
  std::ostringstream details;

  MatrixXd p1_inv, p2 = 0.5 * (proto.p2 + proto.p2.transpose());
  try {
    p1_inv = pd_inverse(proto.p1, "P1");
    (void)pd_inverse(proto.p2, "P2");
  } catch (const SynthesisError& e) {
    rep.details = e.what();
    return rep;
  }

  const MatrixXd w = p1_inv * plant.b * plant.b.transpose() * p1_inv;
  const double rho = proto.rho;
  const double g2h = proto.gamma * proto.gamma / 2.0;

  MatrixXd sigma1(n + l, n + l);
  sigma1.topLeftCorner(n, n) = plant.a.transpose() * p1_inv + p1_inv * plant.a -
                               proto.tau * (2.0 - rho) * w +
                               rho * (1.0 + pi_bar * pi_bar * sc.lambda_max) *
                                   plant.c1.transpose() * plant.c1 +
                               plant.c2.transpose() * plant.c2;
  sigma1.topRightCorner(n, l) = p1_inv * plant.d;
  sigma1.bottomLeftCorner(l, n) = plant.d.transpose() * p1_inv;
  sigma1.bottomRightCorner(l, l) = -g2h * MatrixXd::Identity(l, l);

  const MatrixXd a_obs = plant.a + proto.l_gain * plant.c1;
  MatrixXd sigma2(n + l, n + l);
  sigma2.topLeftCorner(n, n) = a_obs.transpose() * p2 + p2 * a_obs + (4.0 / rho) * proto.tau * w +
                               (8.0 / rho) * p2 * proto.l_gain * proto.l_gain.transpose() * p2;
  sigma2.topRightCorner(n, l) = -p2 * plant.d;
  sigma2.bottomLeftCorner(l, n) = -plant.d.transpose() * p2;
  sigma2.bottomRightCorner(l, l) = -g2h * MatrixXd::Identity(l, l);

  rep.sigma1_max_eig = matops::max_eigenvalue(sigma1);
  rep.sigma2_max_eig = matops::max_eigenvalue(sigma2);
  rep.trace_cond_p1 = matops::max_eigenvalue(sc.kappa * p1_inv - g2h * plant.r_weight) < 0.0;
  rep.trace_cond_p2 = matops::max_eigenvalue(sc.kappa * p2 - g2h * plant.r_weight) < 0.0;
  rep.tau_lower = proto.r1 / (2.0 - rho);
  rep.tau_upper = rho * proto.r2 / 4.0;
  rep.tau_in_interval = rep.tau_lower < proto.tau && proto.tau < rep.tau_upper;

  const double k_err = (proto.k_gain - plant.b.transpose() * p1_inv).norm();
  const double l_err = (p2 * proto.l_gain - proto.y).norm();
  rep.gains_consistent = k_err <= 1e-8 * (1.0 + proto.k_gain.norm()) &&
                         l_err <= 1e-8 * (1.0 + proto.y.norm());

  rep.passed = rep.sigma1_max_eig < 0.0 && rep.sigma2_max_eig < 0.0 && rep.trace_cond_p1 &&
               rep.trace_cond_p2 && rep.tau_in_interval && rep.gains_consistent &&
               proto.r1 > 0.0 && proto.r2 > 0.0 && rho > 0.0 && rho < 2.0;
  rep.details = details.str();
  return rep;
}

Eigen::MatrixXd companion_from_eigenvalues(const std::vector<double>& eigenvalues) {
  const int k = static_cast<int>(eigenvalues.size());
  if (k < 1) throw SynthesisError("need at least one eigenvalue");
  std::vector<double> coef{1.0};  // monic polynomial coefficients, highest power first
  for (const double lambda : eigenvalues) {
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t i = 0; i < coef.size(); ++i) {
      next[i] += coef[i];
      next[i + 1] -= lambda * coef[i];
    }
    coef = std::move(next);
  }
  MatrixXd f = MatrixXd::Zero(k, k);
  f.topRightCorner(k - 1, k - 1).setIdentity();
  for (int j = 0; j < k; ++j) f(k - 1, j) = -coef[static_cast<std::size_t>(k - j)];
  return f;
}

namespace {

bool spectra_disjoint(const MatrixXd& a, const MatrixXd& f) {
  const Eigen::VectorXcd ea = Eigen::EigenSolver<MatrixXd>(a, false).eigenvalues();
  const Eigen::VectorXcd ef = Eigen::EigenSolver<MatrixXd>(f, false).eigenvalues();
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff()});
  for (Eigen::Index i = 0; i < ea.size(); ++i)
    for (Eigen::Index j = 0; j < ef.size(); ++j)
      if (std::abs(ea(i) - ef(j)) <= 1e-8 * scale) return false;
  return true;
}

bool is_hurwitz(const MatrixXd& f) {
  const Eigen::VectorXcd e = Eigen::EigenSolver<MatrixXd>(f, false).eigenvalues();
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e(i).real() >= 0.0) return false;
  return true;
}

double stack_condition_number(const MatrixXd& stack) {
  Eigen::JacobiSVD<MatrixXd> svd(stack);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / (sv(sv.size() - 1));
}

struct Step3ReducedSolution {
  bool ok = false;
  MatrixXd p2;
  double r2 = 0.0;
};

Step3ReducedSolution reduced_step3(const MatrixXd& f_bar, const MatrixXd& w_tilde,
                                   const MatrixXd& r_red, double gamma, double kappa,
                                   std::optional<double> r2_floor,
                                   const lmi::SolverOptions& sopts) {
  const int k = static_cast<int>(f_bar.rows());
  lmi::Problem prob;
  const lmi::MatrixVar p2 = prob.add_symmetric("P2", k);
  const lmi::ScalarVar r2 = prob.add_scalar("r2");
  {
    auto& c = prob.add_constraint(k, lmi::Sense::NegativeDefinite, "observer-lyapunov");
    c.add_scalar_term(r2, w_tilde);
    c.add_matrix_term(p2, f_bar.transpose(), MatrixXd::Identity(k, k));
  }
  {
    auto& c = prob.add_constraint(k, lmi::Sense::PositiveDefinite, "p2-positive");
    c.add_congruence(p2, MatrixXd::Identity(k, k));
  }
  {
    auto& c = prob.add_constraint(k, lmi::Sense::NegativeDefinite, "p2-upper-bound");
    c.add_constant(-(gamma * gamma / kappa) * r_red);
    c.add_congruence(p2, MatrixXd::Identity(k, k));
  }
  {
    auto& c = prob.add_constraint(1, lmi::Sense::PositiveDefinite, "r2-positive");
    c.add_scalar_term(r2, MatrixXd::Ones(1, 1));
  }
  if (r2_floor) {
    auto& c = prob.add_constraint(1, lmi::Sense::PositiveDefinite, "r2-floor");
    c.add_constant(-*r2_floor * MatrixXd::Ones(1, 1));
    c.add_scalar_term(r2, MatrixXd::Ones(1, 1));
  }
  const lmi::Result res = lmi::solve_feasibility(prob, sopts);
  Step3ReducedSolution sol;
  sol.ok = res.feasible();
  if (sol.ok) {
    sol.p2 = prob.matrix_value(res.slots, p2);
    sol.r2 = prob.scalar_value(res.slots, r2);
  }
  return sol;
}

}  // namespace

ReducedOrderOutcome synthesize_reduced_order(const Plant& plant,
                                             const graphs::SpectralConstants& sc, double pi_bar,
                                             double gamma, const ReducedOrderOptions& opts) {
  plant.validate();
  if (gamma <= 0.0) throw SynthesisError("gamma must be positive");
  const int n = plant.n();
  const int l = plant.l();
  const int q1 = plant.q1();
  const int q2 = plant.q2();
  const int k = n - q1;
  if (k < 1) throw SynthesisError("reduced observer needs q1 < n");

  ReducedOrderOutcome out;
  std::ostringstream log;

  if (!check_stabilizable_detectable(plant)) {
    log << "PBH test failed: (A, B, C1) not stabilizable and detectable\n";
    out.log = log.str();
    return out;
  }

  // Step 1: observer structure.
  MatrixXd f_bar;
  if (opts.f_bar_matrix.size() > 0) {
    f_bar = opts.f_bar_matrix;
    if (f_bar.rows() != k || f_bar.cols() != k)
      throw SynthesisError("F matrix must be (n - q1) x (n - q1)");
  } else if (!opts.f_bar_eigenvalues.empty()) {
    if (static_cast<int>(opts.f_bar_eigenvalues.size()) != k)
      throw SynthesisError("need n - q1 observer eigenvalues");
    f_bar = companion_from_eigenvalues(opts.f_bar_eigenvalues);
  } else {
    std::vector<double> eigs(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) eigs[static_cast<std::size_t>(i)] = -1.0 - i;
    f_bar = companion_from_eigenvalues(eigs);
  }
  if (!is_hurwitz(f_bar)) throw SynthesisError("F must be Hurwitz");
  if (!spectra_disjoint(plant.a, f_bar))
    throw matops::SharedEigenvaluesError("F shares eigenvalues with A");

  MatrixXd g = opts.g_matrix;
  MatrixXd t, q1_map, q2_map;
  rng::Stream g_stream(opts.g_seed);
  bool structured = false;
  for (int attempt = 0; attempt <= opts.g_resample_limit; ++attempt) {
    if (g.size() == 0 || attempt > 0) {
      g.resize(k, q1);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < q1; ++j) g(i, j) = g_stream.uniform01();
    }
    t = matops::sylvester_solve(plant.a, f_bar, g * plant.c1);
    MatrixXd stack(n, n);
    stack.topRows(q1) = plant.c1;
    stack.bottomRows(k) = t;
    if (stack_condition_number(stack) < 1e8) {
      const MatrixXd inv = stack.partialPivLu().solve(MatrixXd::Identity(n, n));
      q1_map = inv.leftCols(q1);
      q2_map = inv.rightCols(k);
      structured = true;
      break;
    }
    if (opts.g_matrix.size() > 0)
      throw SingularStackError("[C1; T] is singular for the supplied G");
  }
  if (!structured) throw SingularStackError("could not find G with [C1; T] nonsingular");
  log << "observer structure: sylvester residual="
      << (t * plant.a - f_bar * t - g * plant.c1).norm() << "\n";

  for (const double rho : opts.rho_grid) {
    if (!(rho > 0.0 && rho < sc.lambda_min2)) {
      log << "rho=" << rho << ": skipped (needs 0 < rho < lambda_min2=" << sc.lambda_min2 << ")\n";
      continue;
    }
    log << "rho=" << rho << ":\n";

    const auto build_main = [&](lmi::Problem& prob, lmi::MatrixVar p1, lmi::ScalarVar r1) {
      const int d = n + l + q2;
      auto& c = prob.add_constraint(d, lmi::Sense::NegativeDefinite, "state-lmi");
      MatrixXd m0 = MatrixXd::Zero(d, d);
      m0.block(0, n, n, l) = plant.d;
      m0.block(n, 0, l, n) = plant.d.transpose();
      m0.block(n, n, l, l) = -(gamma * gamma) * MatrixXd::Identity(l, l);
      m0.block(n + l, n + l, q2, q2) = -MatrixXd::Identity(q2, q2);
      c.add_constant(m0);
      c.add_scalar_term(r1, embed(d, 0, -plant.b) * embed(d, 0, plant.b).transpose());
      c.add_matrix_term(p1, embed(d, 0, plant.a), embed(d, 0, MatrixXd::Identity(n, n)));
      c.add_matrix_term(p1, embed(d, 0, MatrixXd::Identity(n, n)), embed(d, n + l, plant.c2));
    };

    const auto solve_p1 = [&](std::optional<double> r1_cap, std::optional<double> trace_bound) {
      return p1_step(plant, gamma * gamma / sc.kappa, build_main, r1_cap, trace_bound,
                     opts.solver);
    };

    std::vector<double> tau_targets;
    if (opts.tau_override) {
      tau_targets = {*opts.tau_override};
    } else {
      const auto r1_min =
          minimal_r1([&](std::optional<double> cap) { return solve_p1(cap, std::nullopt); }, log);
      if (!r1_min) {
        log << "    step 2 infeasible\n";
        continue;
      }
      const double lo_min = *r1_min / (pi_bar * (sc.lambda_min2 - rho));
      tau_targets = {3.0 * lo_min, 10.0 * lo_min, 30.0 * lo_min};
    }

    // R has plant dimension; the observer lives on an (n - q1)-dimensional
    // state, so its bound uses the leading principal block of R.
    const MatrixXd r_red = plant.r_weight.topLeftCorner(k, k);

    for (const double tau_target : tau_targets) {
      const double r1_cap = 0.95 * tau_target * pi_bar * (sc.lambda_min2 - rho);
      Step1Solution s1 = solve_p1(r1_cap, std::nullopt);
      if (!s1.ok) {
        log << "    step 2 infeasible with r1 < " << r1_cap << "\n";
        continue;
      }
      s1 = minimize_inverse_trace([&](double c) { return solve_p1(r1_cap, c); }, std::move(s1),
                                  12, log);
      const MatrixXd p1_inv = pd_inverse(s1.p1, "P1");
      const MatrixXd w_tilde =
          q2_map.transpose() * p1_inv * plant.b * plant.b.transpose() * p1_inv * q2_map;

      const double r2_floor = 1.05 * 4.0 * tau_target * pi_bar * sc.lambda_max / rho;
      const Step3ReducedSolution s3 =
          reduced_step3(f_bar, w_tilde, r_red, gamma, sc.kappa, r2_floor, opts.solver);
      if (!s3.ok) {
        log << "    step 3 infeasible with r2 > " << r2_floor << " (r1=" << s1.r1 << ")\n";
        continue;
      }

      const double tau_lo = s1.r1 / (pi_bar * (sc.lambda_min2 - rho));
      const double tau_hi = rho * s3.r2 / (4.0 * pi_bar * sc.lambda_max);
      log << "    r1=" << s1.r1 << " r2=" << s3.r2 << " tau interval=(" << tau_lo << ", "
          << tau_hi << ")\n";
      if (!(tau_lo < tau_hi)) {
        log << "    empty tau interval\n";
        continue;
      }
      const double tau = opts.tau_override ? *opts.tau_override : std::sqrt(tau_lo * tau_hi);
      if (!(tau_lo < tau && tau < tau_hi)) {
        log << "    tau " << tau << " not inside the interval\n";
        continue;
      }

      ReducedOrderProtocol proto;
      proto.f_bar = f_bar;
      proto.g_gain = g;
      proto.t_map = t;
      proto.q1_map = q1_map;
      proto.q2_map = q2_map;
      proto.k_gain = plant.b.transpose() * p1_inv;
      proto.tau = tau;
      proto.rho = rho;
      proto.gamma = gamma;
      proto.p1 = s1.p1;
      proto.p2 = s3.p2;
      proto.r1 = s1.r1;
      proto.r2 = s3.r2;

      const CertificateReport rep = reduced_certificates(proto, plant, sc, pi_bar);
      if (!rep.passed) {
        log << "    certificate verification failed:\n" << describe(rep) << "\n";
        continue;
      }
      log << "    feasible, tau=" << tau << "\n";
      out.feasible = true;
      out.protocol = std::move(proto);
      out.log = log.str();
      return out;
    }
  }
  log << "no rho in the grid produced a verified protocol\n";
  out.log = log.str();
  return out;
}

CertificateReport reduced_certificates(const ReducedOrderProtocol& proto, const Plant& plant,
                                       const graphs::SpectralConstants& sc, double pi_bar) {
  plant.validate();
  const int n = plant.n();
  const int l = plant.l();
  const int q1 = plant.q1();
  const int q2 = plant.q2();
  const int k = proto.observer_dim();
  if (k != n - q1 || proto.t_map.rows() != k || proto.t_map.cols() != n ||
      proto.p1.rows() != n || proto.p2.rows() != k)
    throw lmi::DimensionMismatchError("protocol does not match the plant dimensions");

  CertificateReport rep;
  MatrixXd p1_inv;
  try {
    p1_inv = pd_inverse(proto.p1, "P1");
    (void)pd_inverse(proto.p2, "P2");
  } catch (const SynthesisError& e) {
    rep.details = e.what();
    return rep;
  }
  const MatrixXd p2 = 0.5 * (proto.p2 + proto.p2.transpose());
  const double g2 = proto.gamma * proto.gamma;

  // Step 2 inequality at the stored (P1, r1).
  {
    const int d = n + l + q2;
    MatrixXd m(d, d);
    m.setZero();
    m.topLeftCorner(n, n) = proto.p1 * plant.a.transpose() + plant.a * proto.p1 -
                            proto.r1 * plant.b * plant.b.transpose();
    m.block(0, n, n, l) = plant.d;
    m.block(n, 0, l, n) = plant.d.transpose();
    m.block(n, n, l, l) = -g2 * MatrixXd::Identity(l, l);
    m.block(0, n + l, n, q2) = proto.p1 * plant.c2.transpose();
    m.block(n + l, 0, q2, n) = plant.c2 * proto.p1;
    m.block(n + l, n + l, q2, q2) = -MatrixXd::Identity(q2, q2);
    rep.sigma1_max_eig = matops::max_eigenvalue(m);
  }
  // Step 3 inequality at the stored (P2, r2).
  {
    const MatrixXd w_tilde = proto.q2_map.transpose() * p1_inv * plant.b * plant.b.transpose() *
                             p1_inv * proto.q2_map;
    const MatrixXd m =
        proto.f_bar.transpose() * p2 + p2 * proto.f_bar + proto.r2 * w_tilde;
    rep.sigma2_max_eig = matops::max_eigenvalue(m);
  }
  rep.trace_cond_p1 = matops::max_eigenvalue(sc.kappa * p1_inv - g2 * plant.r_weight) < 0.0;
  rep.trace_cond_p2 =
      matops::max_eigenvalue(sc.kappa * p2 - g2 * plant.r_weight.topLeftCorner(k, k)) < 0.0;

  rep.tau_lower = proto.r1 / (pi_bar * (sc.lambda_min2 - proto.rho));
  rep.tau_upper = proto.rho * proto.r2 / (4.0 * pi_bar * sc.lambda_max);
  rep.tau_in_interval = rep.tau_lower < proto.tau && proto.tau < rep.tau_upper;

  const MatrixXd sylvester_gap =
      proto.t_map * plant.a - proto.f_bar * proto.t_map - proto.g_gain * plant.c1;
  rep.sylvester_residual =
      sylvester_gap.norm() /
      (proto.t_map.norm() * plant.a.norm() + (proto.g_gain * plant.c1).norm() + 1e-300);
  rep.identity_residual =
      (proto.q1_map * plant.c1 + proto.q2_map * proto.t_map - MatrixXd::Identity(n, n)).norm();
  MatrixXd stack(n, n);
  stack.topRows(q1) = plant.c1;
  stack.bottomRows(k) = proto.t_map;
  rep.stack_condition = stack_condition_number(stack);
  rep.observer_structure_ok = is_hurwitz(proto.f_bar) && spectra_disjoint(plant.a, proto.f_bar) &&
                              rep.sylvester_residual <= 1e-8 && rep.identity_residual <= 1e-8 &&
                              rep.stack_condition < 1e8;

  const double k_err = (proto.k_gain - plant.b.transpose() * p1_inv).norm();
  rep.gains_consistent = k_err <= 1e-8 * (1.0 + proto.k_gain.norm());

  rep.passed = rep.sigma1_max_eig < 0.0 && rep.sigma2_max_eig < 0.0 && rep.trace_cond_p1 &&
               rep.trace_cond_p2 && rep.tau_in_interval && rep.observer_structure_ok &&
               rep.gains_consistent && proto.r1 > 0.0 && proto.r2 > 0.0 && proto.rho > 0.0 &&
               proto.rho < sc.lambda_min2;
  return rep;
}

std::string describe(const CertificateReport& rep) {
  std::ostringstream os;
  os << "  sigma1 max eigenvalue : " << rep.sigma1_max_eig
     << (rep.sigma1_max_eig < 0 ? "  (ok)" : "  (VIOLATED)") << "\n";
  os << "  sigma2 max eigenvalue : " << rep.sigma2_max_eig
     << (rep.sigma2_max_eig < 0 ? "  (ok)" : "  (VIOLATED)") << "\n";
  os << "  trace condition on P1 : " << (rep.trace_cond_p1 ? "ok" : "VIOLATED") << "\n";
  os << "  trace condition on P2 : " << (rep.trace_cond_p2 ? "ok" : "VIOLATED") << "\n";
  os << "  tau interval          : (" << rep.tau_lower << ", " << rep.tau_upper << ")"
     << (rep.tau_in_interval ? "  (tau inside)" : "  (tau OUTSIDE)") << "\n";
  os << "  gains consistent      : " << (rep.gains_consistent ? "yes" : "NO") << "\n";
  if (rep.stack_condition > 0.0) {
    os << "  sylvester residual    : " << rep.sylvester_residual << "\n";
    os << "  Q1 C1 + Q2 T - I      : " << rep.identity_residual << "\n";
    os << "  [C1; T] condition     : " << rep.stack_condition << "\n";
    os << "  observer structure    : " << (rep.observer_structure_ok ? "ok" : "VIOLATED") << "\n";
  }
  os << "  verdict               : " << (rep.passed ? "PASSED" : "FAILED") << "\n";
  if (!rep.details.empty()) os << "  " << rep.details << "\n";
  return os.str();
}

}  // namespace mjcons::synth
