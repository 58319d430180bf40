#include "mjcons/graphs.hpp"

#include <Eigen/Eigenvalues>

#include <queue>

namespace mjcons::graphs {

Digraph::Digraph(Eigen::MatrixXd adjacency) : adj_(std::move(adjacency)) {
  if (adj_.rows() != adj_.cols() || adj_.rows() < 1)
    throw GraphError("adjacency matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < adj_.rows(); ++i) {
    if (adj_(i, i) != 0.0)
      throw GraphError("adjacency diagonal must be exactly zero");
    for (Eigen::Index j = 0; j < adj_.cols(); ++j)
      if (adj_(i, j) < 0.0) throw GraphError("adjacency entries must be nonnegative");
  }
}

Eigen::MatrixXd laplacian(const Digraph& g) {
  const Eigen::MatrixXd& a = g.adjacency();
  Eigen::MatrixXd l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

bool is_balanced(const Digraph& g) {
  const Eigen::MatrixXd& a = g.adjacency();
  const double tol = 1e-12 * std::max(1.0, a.maxCoeff());
  const Eigen::VectorXd in = a.rowwise().sum();
  const Eigen::VectorXd out = a.colwise().sum().transpose();
  return ((in - out).cwiseAbs().maxCoeff() <= tol);
}

TopologyEnsemble::TopologyEnsemble(std::vector<Digraph> graphs) : graphs_(std::move(graphs)) {
  if (graphs_.empty()) throw GraphError("ensemble needs at least one graph");
  const int n = graphs_.front().node_count();
  laplacians_.reserve(graphs_.size());
  union_adjacency_ = Eigen::MatrixXd::Zero(n, n);
  for (const Digraph& g : graphs_) {
    if (g.node_count() != n)
      throw GraphError("all graphs in an ensemble must share the node set");
    laplacians_.push_back(graphs::laplacian(g));
    union_adjacency_ += g.adjacency();
  }
  union_laplacian_ = Eigen::MatrixXd::Zero(n, n);
  for (const Eigen::MatrixXd& l : laplacians_) union_laplacian_ += l;
}

bool union_has_spanning_tree(const TopologyEnsemble& e) {
  const Eigen::MatrixXd& a = e.union_adjacency();
  const int n = e.node_count();
  // a(i, j) > 0 is an edge j -> i, so node j's out-neighbours are the rows
  // with a positive entry in column j.
  for (int root = 0; root < n; ++root) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> q;
    q.push(root);
    seen[static_cast<std::size_t>(root)] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        if (!seen[static_cast<std::size_t>(v)] && a(v, u) > 0.0) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    if (count == n) return true;
  }
  return false;
}

namespace {

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw GraphError("symmetric eigensolve did not converge");
  return es.eigenvalues();
}

}  // namespace

SpectralConstants spectral_constants(const TopologyEnsemble& e) {
  const Eigen::MatrixXd& lun = e.union_laplacian();
  const Eigen::VectorXd ev_gram = symmetric_eigenvalues(lun.transpose() * lun);
  const Eigen::VectorXd ev_sym = symmetric_eigenvalues(lun + lun.transpose());
  const Eigen::MatrixXd m = mean_removal_projector(e.node_count());
  const Eigen::VectorXd ev_m2 = symmetric_eigenvalues(m * m);
  SpectralConstants sc;
  sc.lambda_max = ev_gram(ev_gram.size() - 1);
  sc.lambda_min2 = ev_sym.size() > 1 ? ev_sym(1) : ev_sym(0);
  sc.kappa = ev_m2(ev_m2.size() - 1);
  return sc;
}

Eigen::MatrixXd mean_removal_projector(int n_nodes) {
  const double n = static_cast<double>(n_nodes);
  return Eigen::MatrixXd::Identity(n_nodes, n_nodes) -
         Eigen::MatrixXd::Constant(n_nodes, n_nodes, 1.0 / n);
}

}  // namespace mjcons::graphs
