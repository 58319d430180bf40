#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace mjcons::graphs {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Directed weighted graph on N nodes. adjacency(i, j) > 0 means there is an
// edge from node j to node i, i.e. agent i receives information from agent j.
class Digraph {
 public:
  explicit Digraph(Eigen::MatrixXd adjacency);

  int node_count() const { return static_cast<int>(adj_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adj_; }

 private:
  Eigen::MatrixXd adj_;
};

// L = diag(row sums of A) - A; every row of L sums to zero.
Eigen::MatrixXd laplacian(const Digraph& g);

// True iff every node's weighted in-degree equals its weighted out-degree,
// within 1e-12 relative to the largest edge weight.
bool is_balanced(const Digraph& g);

// Ordered family of digraphs over one node set, one per Markov state.
class TopologyEnsemble {
 public:
  explicit TopologyEnsemble(std::vector<Digraph> graphs);

  int size() const { return static_cast<int>(graphs_.size()); }
  int node_count() const { return graphs_.front().node_count(); }
  const Digraph& graph(int i) const { return graphs_.at(static_cast<std::size_t>(i)); }
  const Eigen::MatrixXd& laplacian(int i) const {
    return laplacians_.at(static_cast<std::size_t>(i));
  }
  const Eigen::MatrixXd& union_laplacian() const { return union_laplacian_; }
  const Eigen::MatrixXd& union_adjacency() const { return union_adjacency_; }

 private:
  std::vector<Digraph> graphs_;
  std::vector<Eigen::MatrixXd> laplacians_;
  Eigen::MatrixXd union_adjacency_;
  Eigen::MatrixXd union_laplacian_;
};

struct SpectralConstants {
  double lambda_max;   // largest eigenvalue of L_un^T L_un
  double lambda_min2;  // second smallest eigenvalue of L_un + L_un^T
  double kappa;        // largest eigenvalue of M^2, M = I - (1/N) 1 1^T
};

// True iff some node reaches every other node along directed edges of the
// union graph.
bool union_has_spanning_tree(const TopologyEnsemble& e);

// Eigenvalues are taken of explicitly symmetrized matrices.
SpectralConstants spectral_constants(const TopologyEnsemble& e);

// M = I - (1/N) 1 1^T, the projector onto the disagreement subspace.
Eigen::MatrixXd mean_removal_projector(int n_nodes);

}  // namespace mjcons::graphs
