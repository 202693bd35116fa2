#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace distopt {

/// Weighted directed communication graph stored as its Laplacian matrix.
///
/// Entry (i,j), i != j, holds -a_ij where a_ij >= 0 is the weight agent i
/// places on information received from agent j (edge j -> i). The diagonal
/// holds the row weight sums, so every row sums to zero. Agents removed
/// from the network keep their index but have identically zero rows and
/// columns and are excluded from the active set.
///
/// Immutable after construction; drop_agent returns a new graph.
class LaplacianGraph {
 public:
  /// Validates Laplacian structure: nonpositive off-diagonal entries,
  /// diagonal equal to the row weight sum, zero rows/columns for inactive
  /// agents. Balancedness (zero column sums) is not required here; query it
  /// with is_balanced.
  LaplacianGraph(Eigen::MatrixXd laplacian, std::vector<bool> active);

  /// All agents active.
  explicit LaplacianGraph(Eigen::MatrixXd laplacian);

  /// Builds the Laplacian from a nonnegative weight matrix (diagonal ignored).
  static LaplacianGraph from_weights(const Eigen::MatrixXd& weights);

  int size() const { return static_cast<int>(laplacian_.rows()); }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }

  bool is_active(int agent) const { return active_[agent]; }
  int active_count() const;
  std::vector<int> active_agents() const;

  /// Weight a_ij (zero when no edge or either endpoint inactive).
  double weight(int i, int j) const;

 private:
  Eigen::MatrixXd laplacian_;
  std::vector<bool> active_;
};

/// The five-agent example graph; exact dyadic entries.
LaplacianGraph fig2_graph();

/// Applies L (x) I_m to stacked agent vectors: component i of the result is
/// sum_j a_ij (z_i - z_j), evaluated dimension-wise. z must have n*m entries
/// in agent-major order.
Eigen::VectorXd apply(const LaplacianGraph& g, const Eigen::VectorXd& z, int m);

/// Same operation with one row per agent (row i = z_i^T). Convenient for
/// simulations that carry per-agent signal matrices.
Eigen::MatrixXd apply_rows(const LaplacianGraph& g, const Eigen::MatrixXd& z_rows);

/// True iff every row and column sum has magnitude at most tol.
bool is_balanced(const LaplacianGraph& g, double tol = 1e-12);

/// True iff the directed graph on active agents (edge j -> i when a_ij > 0)
/// is strongly connected.
bool is_connected(const LaplacianGraph& g);

/// Removes an agent and rebalances the surviving weights.
///
/// The new weights are supported on a subset of the surviving edges: each
/// remaining agent is covered by a shortest directed cycle through it, cycles
/// are merged until the kept edge set is strongly connected, and every chosen
/// cycle contributes weight 1/2 to its edges. Dropping an already inactive
/// agent is a no-op. Throws std::runtime_error when the surviving graph
/// cannot be rebalanced to a strongly connected balanced graph.
LaplacianGraph drop_agent(const LaplacianGraph& g, int agent);

/// Plain-text matrix serialization (rows of decimals, whitespace separated).
LaplacianGraph load_graph(std::istream& in);
LaplacianGraph load_graph_file(const std::string& path);
void save_graph(const LaplacianGraph& g, std::ostream& out);

}  // namespace distopt
