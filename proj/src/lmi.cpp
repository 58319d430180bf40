#include "mjcons/lmi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mjcons::lmi {

AffineMatrixExpr::AffineMatrixExpr(Problem* owner, int dim, Sense sense, std::string label)
    : owner_(owner),
      dim_(dim),
      sense_(sense),
      label_(std::move(label)),
      constant_(Eigen::MatrixXd::Zero(dim, dim)) {}

void AffineMatrixExpr::add_constant(const Eigen::MatrixXd& m) {
  if (m.rows() != dim_ || m.cols() != dim_)
    throw DimensionMismatchError("constant block has wrong dimension in " + label_);
  constant_ += 0.5 * (m + m.transpose());
}

void AffineMatrixExpr::add_scalar_term(ScalarVar v, const Eigen::MatrixXd& coeff) {
  if (coeff.rows() != dim_ || coeff.cols() != dim_)
    throw DimensionMismatchError("scalar coefficient has wrong dimension in " + label_);
  scalar_terms_.emplace_back(v.id, 0.5 * (coeff + coeff.transpose()));
}

void AffineMatrixExpr::add_matrix_term(MatrixVar v, const Eigen::MatrixXd& left,
                                       const Eigen::MatrixXd& right) {
  const auto& info = owner_->var(v.id);
  if (left.rows() != dim_ || right.rows() != dim_ || left.cols() != info.rows ||
      right.cols() != info.cols)
    throw DimensionMismatchError("matrix term factors have wrong dimensions in " + label_);
  matrix_terms_.push_back(MatrixTerm{v.id, left, right, 1.0, MatrixTerm::Kind::Pair});
}

void AffineMatrixExpr::add_congruence(MatrixVar v, const Eigen::MatrixXd& m, double scale) {
  const auto& info = owner_->var(v.id);
  if (!info.symmetric)
    throw DimensionMismatchError("congruence requires a symmetric variable in " + label_);
  if (m.rows() != dim_ || m.cols() != info.rows)
    throw DimensionMismatchError("congruence factor has wrong dimensions in " + label_);
  matrix_terms_.push_back(MatrixTerm{v.id, m, m, scale, MatrixTerm::Kind::Congruence});
}

void AffineMatrixExpr::add_trace_term(MatrixVar v, const Eigen::MatrixXd& weight,
                                      const Eigen::MatrixXd& coeff) {
  const auto& info = owner_->var(v.id);
  if (weight.rows() != info.rows || weight.cols() != info.cols || coeff.rows() != dim_ ||
      coeff.cols() != dim_)
    throw DimensionMismatchError("trace term has wrong dimensions in " + label_);
  matrix_terms_.push_back(
      MatrixTerm{v.id, weight, 0.5 * (coeff + coeff.transpose()), 1.0, MatrixTerm::Kind::Trace});
}

Eigen::MatrixXd AffineMatrixExpr::evaluate(const Eigen::VectorXd& slots) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [id, coeff] : scalar_terms_)
    out += slots(owner_->var(id).slot_offset) * coeff;
  for (const auto& term : matrix_terms_) {
    const Eigen::MatrixXd v = owner_->matrix_value(slots, MatrixVar{term.var});
    switch (term.kind) {
      case MatrixTerm::Kind::Pair:
        out += term.left * v * term.right.transpose() +
               term.right * v.transpose() * term.left.transpose();
        break;
      case MatrixTerm::Kind::Congruence:
        out += term.scale * term.left * v * term.left.transpose();
        break;
      case MatrixTerm::Kind::Trace:
        out += term.left.cwiseProduct(v).sum() * term.right;
        break;
    }
  }
  return out;
}

ScalarVar Problem::add_scalar(std::string name) {
  VarInfo info{std::move(name), false, false, 1, 1, slot_count_, 1};
  vars_.push_back(std::move(info));
  slot_count_ += 1;
  return ScalarVar{static_cast<int>(vars_.size()) - 1};
}

MatrixVar Problem::add_symmetric(std::string name, int dim) {
  const int size = dim * (dim + 1) / 2;
  VarInfo info{std::move(name), true, true, dim, dim, slot_count_, size};
  vars_.push_back(std::move(info));
  slot_count_ += size;
  return MatrixVar{static_cast<int>(vars_.size()) - 1};
}

MatrixVar Problem::add_rectangular(std::string name, int rows, int cols) {
  VarInfo info{std::move(name), false, true, rows, cols, slot_count_, rows * cols};
  vars_.push_back(std::move(info));
  slot_count_ += rows * cols;
  return MatrixVar{static_cast<int>(vars_.size()) - 1};
}

AffineMatrixExpr& Problem::add_constraint(int dim, Sense sense, std::string label) {
  constraints_.push_back(AffineMatrixExpr(this, dim, sense, std::move(label)));
  return constraints_.back();
}

double Problem::scalar_value(const Eigen::VectorXd& slots, ScalarVar v) const {
  return slots(var(v.id).slot_offset);
}

Eigen::MatrixXd Problem::matrix_value(const Eigen::VectorXd& slots, MatrixVar v) const {
  const VarInfo& info = var(v.id);
  Eigen::MatrixXd m(info.rows, info.cols);
  int k = info.slot_offset;
  if (info.symmetric) {
    for (int j = 0; j < info.cols; ++j)
      for (int i = 0; i <= j; ++i) {
        m(i, j) = slots(k);
        m(j, i) = slots(k);
        ++k;
      }
  } else {
    for (int j = 0; j < info.cols; ++j)
      for (int i = 0; i < info.rows; ++i) m(i, j) = slots(k++);
  }
  return m;
}

void Problem::set_scalar(Eigen::VectorXd& slots, ScalarVar v, double value) const {
  slots(var(v.id).slot_offset) = value;
}

void Problem::set_matrix(Eigen::VectorXd& slots, MatrixVar v, const Eigen::MatrixXd& value) const {
  const VarInfo& info = var(v.id);
  if (value.rows() != info.rows || value.cols() != info.cols)
    throw DimensionMismatchError("set_matrix: wrong dimensions for " + info.name);
  int k = info.slot_offset;
  if (info.symmetric) {
    for (int j = 0; j < info.cols; ++j)
      for (int i = 0; i <= j; ++i) slots(k++) = 0.5 * (value(i, j) + value(j, i));
  } else {
    for (int j = 0; j < info.cols; ++j)
      for (int i = 0; i < info.rows; ++i) slots(k++) = value(i, j);
  }
}

namespace {

// One constraint compiled to G(x) = F0 + sum_k x_k Fk over the scalarized
// variable slots, sign-flipped to "negative definite required" and divided
// by a per-constraint magnitude so margins are relative.
struct Compiled {
  int dim;
  double scale;
  Eigen::MatrixXd f0;
  std::vector<std::pair<int, Eigen::MatrixXd>> coeffs;  // slot index -> Fk
};

class CoeffAccumulator {
 public:
  CoeffAccumulator(int dim, int nslots) : dim_(dim), map_(static_cast<std::size_t>(nslots), -1) {}

  Eigen::MatrixXd& at(int slot, std::vector<std::pair<int, Eigen::MatrixXd>>& out) {
    int& idx = map_[static_cast<std::size_t>(slot)];
    if (idx < 0) {
      idx = static_cast<int>(out.size());
      out.emplace_back(slot, Eigen::MatrixXd::Zero(dim_, dim_));
    }
    return out[static_cast<std::size_t>(idx)].second;
  }

 private:
  int dim_;
  std::vector<int> map_;
};

}  // namespace

class Solver {
 public:
  Solver(const Problem& p, const SolverOptions& opts) : p_(p), opts_(opts) { compile(); }

  Result run();
  std::vector<double> normalized_eigenvalues(const Eigen::VectorXd& slots) const;

 private:
  void compile();
  double worst_eig(const Eigen::VectorXd& z) const;
  bool strictly_feasible(const Eigen::VectorXd& z, double t) const;
  double barrier_value(const Eigen::VectorXd& z, double t, double eta, bool* ok) const;
  int center(Eigen::VectorXd& z, double& t, double eta);

  const Problem& p_;
  SolverOptions opts_;
  std::vector<Compiled> cons_;
  int nslots_ = 0;
  int barrier_degree_ = 0;
};

void Solver::compile() {
  nslots_ = p_.slot_count();
  for (int c = 0; c < p_.constraint_count(); ++c) {
    const AffineMatrixExpr& e = p_.constraint(c);
    const double sign = e.sense_ == Sense::NegativeDefinite ? 1.0 : -1.0;
    Compiled cc;
    cc.dim = e.dim();
    cc.f0 = sign * e.constant_;
    CoeffAccumulator acc(e.dim(), nslots_);

    for (const auto& [id, coeff] : e.scalar_terms_)
      acc.at(p_.var(id).slot_offset, cc.coeffs) += sign * coeff;

    for (const auto& term : e.matrix_terms_) {
      const auto& info = p_.var(term.var);
      using Kind = AffineMatrixExpr::MatrixTerm::Kind;
      int slot = info.slot_offset;
      if (info.symmetric) {
        for (int j = 0; j < info.cols; ++j)
          for (int i = 0; i <= j; ++i, ++slot) {
            Eigen::MatrixXd& fk = acc.at(slot, cc.coeffs);
            if (term.kind == Kind::Congruence) {
              const auto li = term.left.col(i);
              const auto lj = term.left.col(j);
              if (i == j) {
                fk += (sign * term.scale) * (li * li.transpose());
              } else {
                fk += (sign * term.scale) * (li * lj.transpose() + lj * li.transpose());
              }
            } else if (term.kind == Kind::Trace) {
              const double w = i == j ? term.left(i, i) : term.left(i, j) + term.left(j, i);
              fk += (sign * w) * term.right;
            } else {
              const auto li = term.left.col(i);
              const auto lj = term.left.col(j);
              const auto ri = term.right.col(i);
              const auto rj = term.right.col(j);
              // unit perturbation of the (i, j) = (j, i) entries of V
              Eigen::MatrixXd half = li * rj.transpose() + rj * li.transpose();
              if (i != j) half += lj * ri.transpose() + ri * lj.transpose();
              fk += sign * half;
            }
          }
      } else {
        for (int j = 0; j < info.cols; ++j)
          for (int i = 0; i < info.rows; ++i, ++slot) {
            Eigen::MatrixXd& fk = acc.at(slot, cc.coeffs);
            if (term.kind == Kind::Trace) {
              fk += (sign * term.left(i, j)) * term.right;
            } else {
              const auto li = term.left.col(i);
              const auto rj = term.right.col(j);
              fk += sign * (li * rj.transpose() + rj * li.transpose());
            }
          }
      }
    }

    double scale = std::max(1.0, cc.f0.cwiseAbs().maxCoeff());
    for (const auto& [slot, fk] : cc.coeffs) scale = std::max(scale, fk.cwiseAbs().maxCoeff());
    cc.scale = scale;
    cc.f0 /= scale;
    for (auto& [slot, fk] : cc.coeffs) fk /= scale;
    barrier_degree_ += cc.dim;
    cons_.push_back(std::move(cc));
  }
  barrier_degree_ += 2 * nslots_;  // box barriers
}

namespace {

Eigen::MatrixXd eval_compiled(const Compiled& c, const Eigen::VectorXd& z) {
  Eigen::MatrixXd g = c.f0;
  for (const auto& [slot, fk] : c.coeffs) g += z(slot) * fk;
  return g;
}

}  // namespace

double Solver::worst_eig(const Eigen::VectorXd& z) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : cons_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eval_compiled(c, z), Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return worst;
}

bool Solver::strictly_feasible(const Eigen::VectorXd& z, double t) const {
  if (z.cwiseAbs().maxCoeff() >= opts_.var_bound) return false;
  for (const auto& c : cons_) {
    Eigen::MatrixXd s = -eval_compiled(c, z);
    s.diagonal().array() += t;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

double Solver::barrier_value(const Eigen::VectorXd& z, double t, double eta, bool* ok) const {
  double f = eta * t;
  *ok = true;
  if (z.cwiseAbs().maxCoeff() >= opts_.var_bound) {
    *ok = false;
    return 0.0;
  }
  for (const auto& c : cons_) {
    Eigen::MatrixXd s = -eval_compiled(c, z);
    s.diagonal().array() += t;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      *ok = false;
      return 0.0;
    }
    f -= 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  const double b = opts_.var_bound;
  for (int k = 0; k < nslots_; ++k) f -= std::log(b - z(k)) + std::log(b + z(k));
  return f;
}

// Damped Newton on (z, t) for fixed eta. Returns iterations used.
int Solver::center(Eigen::VectorXd& z, double& t, double eta) {
  const int p = nslots_;
  Eigen::VectorXd grad(p + 1);
  Eigen::MatrixXd hess(p + 1, p + 1);
  int iters = 0;

  for (; iters < opts_.max_newton; ++iters) {
    grad.setZero();
    hess.setZero();
    grad(p) = eta;

    bool ok = true;
    for (const auto& c : cons_) {
      Eigen::MatrixXd s = -eval_compiled(c, z);
      s.diagonal().array() += t;
      Eigen::LLT<Eigen::MatrixXd> llt(s);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const auto& l = llt.matrixL();
      const int nk = static_cast<int>(c.coeffs.size());
      std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(nk) + 1);
      for (int k = 0; k < nk; ++k) {
        Eigen::MatrixXd tmp = l.solve(c.coeffs[static_cast<std::size_t>(k)].second);
        w[static_cast<std::size_t>(k)] = l.solve(tmp.transpose());
      }
      // epigraph direction: dS/dt = I
      {
        Eigen::MatrixXd tmp = l.solve(Eigen::MatrixXd::Identity(c.dim, c.dim));
        w[static_cast<std::size_t>(nk)] = l.solve(tmp.transpose());
      }
      for (int k = 0; k < nk; ++k) {
        const int sk = c.coeffs[static_cast<std::size_t>(k)].first;
        grad(sk) += w[static_cast<std::size_t>(k)].trace();
        for (int m = 0; m <= k; ++m) {
          const int sm = c.coeffs[static_cast<std::size_t>(m)].first;
          const double h = w[static_cast<std::size_t>(k)]
                               .cwiseProduct(w[static_cast<std::size_t>(m)])
                               .sum();
          hess(sk, sm) += h;
          if (sk != sm) hess(sm, sk) += h;
        }
        const double ht = w[static_cast<std::size_t>(k)]
                              .cwiseProduct(w[static_cast<std::size_t>(nk)])
                              .sum();
        hess(sk, p) -= ht;
        hess(p, sk) -= ht;
      }
      grad(p) -= w[static_cast<std::size_t>(nk)].trace();
      hess(p, p) += w[static_cast<std::size_t>(nk)].squaredNorm();
    }
    if (!ok) break;  // should not happen: iterates stay strictly feasible

    const double b = opts_.var_bound;
    for (int k = 0; k < p; ++k) {
      grad(k) += 1.0 / (b - z(k)) - 1.0 / (b + z(k));
      hess(k, k) += 1.0 / ((b - z(k)) * (b - z(k))) + 1.0 / ((b + z(k)) * (b + z(k)));
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = -ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      step = -hess.ldlt().solve(grad);
      if (!step.allFinite()) break;
    }
    const double decrement2 = -grad.dot(step);
    if (decrement2 <= 2e-9) break;

    bool f0_ok = true;
    const double f0 = barrier_value(z, t, eta, &f0_ok);
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-14) {
      const Eigen::VectorXd z_new = z + alpha * step.head(p);
      const double t_new = t + alpha * step(p);
      bool fok = true;
      const double f_new = barrier_value(z_new, t_new, eta, &fok);
      if (fok && f_new <= f0 - 0.01 * alpha * decrement2) {
        z = z_new;
        t = t_new;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  return iters;
}

Result Solver::run() {
  Result res;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nslots_);
  double t = worst_eig(z);
  t += 0.5 * std::max(1.0, std::abs(t));

  double eta = opts_.eta0;
  double best_worst = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = z;
  const double eps = opts_.margin;
  std::ostringstream diag;
  bool decided = false;

  for (int outer = 0; outer < opts_.max_outer; ++outer) {
    res.newton_iterations += center(z, t, eta);
    const double worst = worst_eig(z);
    if (worst < best_worst) {
      best_worst = worst;
      best_z = z;
    }
    const double gap = static_cast<double>(barrier_degree_) / eta;
    diag << "eta=" << eta << " t=" << t << " worst=" << worst << " gap=" << gap << "\n";

    if (best_worst <= -opts_.deep_margin_factor * eps) {
      res.status = Status::Feasible;
      decided = true;
      break;
    }
    // t is eta-centered, so t - gap lower-bounds the achievable worst
    // eigenvalue within the variable box.
    if (t - gap > -eps) {
      res.status = best_worst <= -eps ? Status::Feasible : Status::Infeasible;
      decided = true;
      break;
    }
    if (gap < 0.25 * eps) {
      res.status = best_worst <= -eps ? Status::Feasible : Status::Infeasible;
      decided = true;
      break;
    }
    eta *= opts_.eta_growth;
  }
  if (!decided) res.status = best_worst <= -eps ? Status::Feasible : Status::MaxIterations;

  res.slots = best_z;
  res.worst_eigenvalue = best_worst;
  res.diagnostics = diag.str();
  return res;
}

std::vector<double> Solver::normalized_eigenvalues(const Eigen::VectorXd& slots) const {
  std::vector<double> out;
  out.reserve(cons_.size());
  for (const auto& c : cons_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eval_compiled(c, slots),
                                                      Eigen::EigenvaluesOnly);
    out.push_back(es.eigenvalues().maxCoeff());
  }
  return out;
}

Result solve_feasibility(const Problem& p, const SolverOptions& opts) {
  if (p.constraint_count() == 0) throw LmiError("no constraints");
  Solver solver(p, opts);
  return solver.run();
}

std::vector<double> normalized_constraint_eigenvalues(const Problem& p,
                                                      const Eigen::VectorXd& slots) {
  Solver solver(p, SolverOptions{});
  return solver.normalized_eigenvalues(slots);
}

}  // namespace mjcons::lmi
