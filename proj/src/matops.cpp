#include "mjcons/matops.hpp"

#include <Eigen/Eigenvalues>

namespace mjcons::matops {

Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f,
                                const Eigen::MatrixXd& rhs) {
  const Eigen::Index n = a.rows();
  const Eigen::Index k = f.rows();
  if (a.cols() != n || f.cols() != k || rhs.rows() != k || rhs.cols() != n)
    throw MatopsError("sylvester_solve: inconsistent dimensions");

  const Eigen::VectorXcd eig_a = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues();
  const Eigen::VectorXcd eig_f = Eigen::EigenSolver<Eigen::MatrixXd>(f, false).eigenvalues();
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff()});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (std::abs(eig_a(i) - eig_f(j)) <= 1e-8 * scale)
        throw SharedEigenvaluesError("A and F have (nearly) common eigenvalues");

  // vec(TA) = (A^T (x) I_k) vec(T), vec(FT) = (I_n (x) F) vec(T), column-major.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n * k, n * k);
  for (Eigen::Index bi = 0; bi < n; ++bi)
    for (Eigen::Index bj = 0; bj < n; ++bj)
      sys.block(bi * k, bj * k, k, k) =
          a(bj, bi) * Eigen::MatrixXd::Identity(k, k) -
          (bi == bj ? f : Eigen::MatrixXd::Zero(k, k));

  Eigen::VectorXd vec_rhs(n * k);
  for (Eigen::Index j = 0; j < n; ++j) vec_rhs.segment(j * k, k) = rhs.col(j);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) throw SingularSystemError("Kronecker system is singular");
  const Eigen::VectorXd vec_t = lu.solve(vec_rhs);

  Eigen::MatrixXd t(k, n);
  for (Eigen::Index j = 0; j < n; ++j) t.col(j) = vec_t.segment(j * k, k);

  const double resid = (t * a - f * t - rhs).norm();
  const double bound = 1e-8 * (t.norm() * a.norm() + f.norm() * t.norm() + rhs.norm() + 1.0);
  if (resid > bound)
    throw SingularSystemError("Sylvester residual too large: " + std::to_string(resid));
  return t;
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw NotSymmetricError("matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSymmetricError("matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

bool young_bound_holds(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                       const Eigen::MatrixXd& phi) {
  if (p.size() != q.size() || phi.rows() != p.size() || phi.cols() != p.size())
    throw MatopsError("young_bound_holds: inconsistent dimensions");
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (phi + phi.transpose()));
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError("Phi is not positive definite");
  const double lhs = 2.0 * p.dot(q);
  const double rhs = p.dot(phi * p) + q.dot(llt.solve(q));
  // Tiny relative slack so the exact-equality case (p == q, Phi == I) is not
  // lost to round-off.
  const double slack = 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0);
  return lhs <= rhs + slack;
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw MatopsError("eigensolve did not converge");
  return es.eigenvalues().maxCoeff();
}

}  // namespace mjcons::matops
