#include "distopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace distopt {
namespace {

constexpr double kStructureTol = 1e-12;

void validate_laplacian(const Eigen::MatrixXd& L, const std::vector<bool>& active) {
  if (L.rows() != L.cols()) throw std::invalid_argument("Laplacian must be square");
  const int n = static_cast<int>(L.rows());
  if (static_cast<int>(active.size()) != n)
    throw std::invalid_argument("active mask size does not match Laplacian");
  for (int i = 0; i < n; ++i) {
    double row_weights = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (L(i, j) > kStructureTol)
        throw std::invalid_argument("off-diagonal Laplacian entries must be nonpositive");
      row_weights += -L(i, j);
    }
    if (std::abs(L(i, i) - row_weights) > 1e-9)
      throw std::invalid_argument("diagonal entry must equal the row weight sum");
    if (!active[i] && (L.row(i).cwiseAbs().maxCoeff() > 0.0 || L.col(i).cwiseAbs().maxCoeff() > 0.0))
      throw std::invalid_argument("inactive agent has nonzero Laplacian entries");
  }
}

}  // namespace

LaplacianGraph::LaplacianGraph(Eigen::MatrixXd laplacian, std::vector<bool> active)
    : laplacian_(std::move(laplacian)), active_(std::move(active)) {
  validate_laplacian(laplacian_, active_);
}

LaplacianGraph::LaplacianGraph(Eigen::MatrixXd laplacian)
    : laplacian_(std::move(laplacian)),
      active_(static_cast<size_t>(laplacian_.rows()), true) {
  validate_laplacian(laplacian_, active_);
}

LaplacianGraph LaplacianGraph::from_weights(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols())
    throw std::invalid_argument("weight matrix must be square");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("weights must be nonnegative");
  const int n = static_cast<int>(weights.rows());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      L(i, j) = -weights(i, j);
      row_sum += weights(i, j);
    }
    L(i, i) = row_sum;
  }
  return LaplacianGraph(std::move(L));
}

int LaplacianGraph::active_count() const {
  return static_cast<int>(std::count(active_.begin(), active_.end(), true));
}

std::vector<int> LaplacianGraph::active_agents() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (active_[i]) out.push_back(i);
  return out;
}

double LaplacianGraph::weight(int i, int j) const {
  if (i == j) return 0.0;
  const double w = -laplacian_(i, j);
  return w > 0.0 ? w : 0.0;
}

LaplacianGraph fig2_graph() {
  Eigen::MatrixXd L(5, 5);
  // clang-format off
  L <<  1.0,  -0.5,   0.0,   0.0,  -0.5,
        0.0,  0.75,   0.0, -0.75,   0.0,
        0.0, -0.25,   0.5, -0.25,   0.0,
       -0.5,   0.0,  -0.5,   1.5,  -0.5,
       -0.5,   0.0,   0.0,  -0.5,   1.0;
  // clang-format on
  return LaplacianGraph(std::move(L));
}

Eigen::VectorXd apply(const LaplacianGraph& g, const Eigen::VectorXd& z, int m) {
  const int n = g.size();
  if (m < 1) throw std::invalid_argument("per-agent dimension must be positive");
  if (z.size() != static_cast<Eigen::Index>(n) * m)
    throw std::invalid_argument("stacked vector has wrong size: expected n*m entries");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
  for (int i = 0; i < n; ++i) {
    if (!g.is_active(i)) continue;
    auto vi = out.segment(static_cast<Eigen::Index>(i) * m, m);
    const auto zi = z.segment(static_cast<Eigen::Index>(i) * m, m);
    for (int j = 0; j < n; ++j) {
      const double a = g.weight(i, j);
      if (a == 0.0) continue;
      vi += a * (zi - z.segment(static_cast<Eigen::Index>(j) * m, m));
    }
  }
  return out;
}

Eigen::MatrixXd apply_rows(const LaplacianGraph& g, const Eigen::MatrixXd& z_rows) {
  const int n = g.size();
  if (z_rows.rows() != n)
    throw std::invalid_argument("row-stacked input must have one row per agent");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(z_rows.rows(), z_rows.cols());
  for (int i = 0; i < n; ++i) {
    if (!g.is_active(i)) continue;
    for (int j = 0; j < n; ++j) {
      const double a = g.weight(i, j);
      if (a == 0.0) continue;
      out.row(i) += a * (z_rows.row(i) - z_rows.row(j));
    }
  }
  return out;
}

bool is_balanced(const LaplacianGraph& g, double tol) {
  if (tol < 0) throw std::invalid_argument("tolerance must be nonnegative");
  const auto& L = g.laplacian();
  const double row = L.rowwise().sum().cwiseAbs().maxCoeff();
  const double col = L.colwise().sum().cwiseAbs().maxCoeff();
  return row <= tol && col <= tol;
}

namespace {

// Adjacency in information-flow direction: out[j] lists i with a_ij > 0.
std::vector<std::vector<int>> flow_adjacency(const LaplacianGraph& g) {
  std::vector<std::vector<int>> out(static_cast<size_t>(g.size()));
  for (int j = 0; j < g.size(); ++j)
    for (int i = 0; i < g.size(); ++i)
      if (i != j && g.weight(i, j) > 0.0) out[static_cast<size_t>(j)].push_back(i);
  return out;
}

std::vector<bool> reachable(const std::vector<std::vector<int>>& adj,
                            const std::vector<bool>& allowed, int start) {
  std::vector<bool> seen(adj.size(), false);
  std::deque<int> queue{start};
  seen[static_cast<size_t>(start)] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!allowed[static_cast<size_t>(v)] || seen[static_cast<size_t>(v)]) continue;
      seen[static_cast<size_t>(v)] = true;
      queue.push_back(v);
    }
  }
  return seen;
}

bool strongly_connected(const std::vector<std::vector<int>>& adj,
                        const std::vector<int>& nodes, int n) {
  if (nodes.empty()) return false;
  if (nodes.size() == 1) return true;
  std::vector<bool> allowed(static_cast<size_t>(n), false);
  for (int v : nodes) allowed[static_cast<size_t>(v)] = true;
  std::vector<std::vector<int>> radj(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u)
    for (int v : adj[static_cast<size_t>(u)]) radj[static_cast<size_t>(v)].push_back(u);
  const auto fwd = reachable(adj, allowed, nodes.front());
  const auto bwd = reachable(radj, allowed, nodes.front());
  for (int v : nodes)
    if (!fwd[static_cast<size_t>(v)] || !bwd[static_cast<size_t>(v)]) return false;
  return true;
}

// Shortest directed cycle through start, neighbors scanned in index order.
// Returns the node sequence (start, ..., last) with an edge last -> start,
// or empty when no cycle exists.
std::vector<int> shortest_cycle_through(const std::vector<std::vector<int>>& adj,
                                        const std::vector<bool>& allowed, int start) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<int> dist(static_cast<size_t>(n), -1);
  std::deque<int> queue{start};
  dist[static_cast<size_t>(start)] = 0;
  int closer = -1;  // node that closes the cycle back to start
  while (!queue.empty() && closer < 0) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!allowed[static_cast<size_t>(v)]) continue;
      if (v == start) {
        closer = u;
        break;
      }
      if (dist[static_cast<size_t>(v)] >= 0) continue;
      dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
      parent[static_cast<size_t>(v)] = u;
      queue.push_back(v);
    }
  }
  if (closer < 0) return {};
  std::vector<int> path;
  for (int v = closer; v != -1; v = parent[static_cast<size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());  // starts at `start`
  return path;
}

}  // namespace

bool is_connected(const LaplacianGraph& g) {
  const auto nodes = g.active_agents();
  if (nodes.empty()) return false;
  return strongly_connected(flow_adjacency(g), nodes, g.size());
}

LaplacianGraph drop_agent(const LaplacianGraph& g, int agent) {
  const int n = g.size();
  if (agent < 0 || agent >= n) throw std::out_of_range("agent index out of range");
  if (!g.is_active(agent)) return g;  // idempotent

  std::vector<bool> active(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) active[static_cast<size_t>(i)] = g.is_active(i);
  active[static_cast<size_t>(agent)] = false;

  std::vector<int> survivors;
  for (int i = 0; i < n; ++i)
    if (active[static_cast<size_t>(i)]) survivors.push_back(i);

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  if (survivors.size() <= 1) {
    LaplacianGraph out = LaplacianGraph::from_weights(weights);
    return LaplacianGraph(out.laplacian(), active);
  }

  // Surviving edges, in information-flow direction (u -> v when a_vu > 0).
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int u : survivors)
    for (int v : survivors)
      if (u != v && g.weight(v, u) > 0.0) adj[static_cast<size_t>(u)].push_back(v);

  if (!strongly_connected(adj, survivors, n))
    throw std::runtime_error(
        "cannot rebalance after dropping agent " + std::to_string(agent + 1) +
        ": surviving graph is not strongly connected");

  const auto add_cycle = [&](const std::vector<int>& cycle) {
    for (size_t t = 0; t < cycle.size(); ++t) {
      const int u = cycle[t];
      const int v = cycle[(t + 1) % cycle.size()];
      weights(v, u) += 0.5;  // edge u -> v carries weight a_vu
    }
  };

  // Cover every surviving node with a shortest directed cycle through it.
  std::vector<bool> covered(static_cast<size_t>(n), false);
  for (int s : survivors) {
    if (covered[static_cast<size_t>(s)]) continue;
    const auto cycle = shortest_cycle_through(adj, active, s);
    if (cycle.empty())
      throw std::runtime_error(
          "cannot rebalance after dropping agent " + std::to_string(agent + 1) +
          ": no directed cycle through agent " + std::to_string(s + 1));
    add_cycle(cycle);
    for (int v : cycle) covered[static_cast<size_t>(v)] = true;
  }

  // Merge cycle components until the kept edge set is strongly connected:
  // repeatedly grow from the component of the first survivor with a shortest
  // cycle that leaves it.
  const auto kept_adjacency = [&]() {
    std::vector<std::vector<int>> kept(static_cast<size_t>(n));
    for (int u : survivors)
      for (int v : survivors)
        if (u != v && weights(v, u) > 0.0) kept[static_cast<size_t>(u)].push_back(v);
    return kept;
  };
  while (!strongly_connected(kept_adjacency(), survivors, n)) {
    const auto kept = kept_adjacency();
    std::vector<bool> allowed(static_cast<size_t>(n), false);
    for (int v : survivors) allowed[static_cast<size_t>(v)] = true;
    const auto comp = reachable(kept, allowed, survivors.front());
    bool merged = false;
    for (int s : survivors) {
      if (!comp[static_cast<size_t>(s)]) continue;
      const auto cycle = shortest_cycle_through(adj, active, s);
      bool leaves = false;
      for (int v : cycle)
        if (!comp[static_cast<size_t>(v)]) leaves = true;
      if (leaves) {
        add_cycle(cycle);
        merged = true;
        break;
      }
    }
    if (!merged)
      throw std::runtime_error(
          "cannot rebalance after dropping agent " + std::to_string(agent + 1) +
          ": cycle cover does not connect the surviving agents");
  }

  LaplacianGraph rebuilt = LaplacianGraph::from_weights(weights);
  return LaplacianGraph(rebuilt.laplacian(), active);
}

LaplacianGraph load_graph(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("graph file contains no matrix rows");
  const size_t n = rows.size();
  Eigen::MatrixXd L(n, n);
  for (size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw std::runtime_error("graph file row " + std::to_string(i + 1) + " has " +
                               std::to_string(rows[i].size()) + " entries, expected " +
                               std::to_string(n));
    for (size_t j = 0; j < n; ++j) L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return LaplacianGraph(std::move(L));
}

LaplacianGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return load_graph(in);
}

void save_graph(const LaplacianGraph& g, std::ostream& out) {
  const auto& L = g.laplacian();
  char buf[32];
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", L(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace distopt
