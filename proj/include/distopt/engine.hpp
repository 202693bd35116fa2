#pragma once

#include "distopt/blocks.hpp"
#include "distopt/graph.hpp"
#include "distopt/problem.hpp"

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <vector>

namespace distopt {

/// Scheduled topology change: the agent leaves the network at the start of
/// the given iteration. Agent indices are zero-based.
struct NetworkEvent {
  int agent = 0;
  long iteration = 0;
};

/// How optimizer and estimator(s) are wired into a distributed algorithm.
///
/// General: gradients drive the optimizer, whose outputs are averaged by one
/// second-order estimator that produces the iterates.
/// Factored: gradients are averaged by the right estimator, the optimizer
/// acts on the averaged gradient, and the left estimator averages the
/// optimizer outputs into the iterates.
class AlgorithmForm {
 public:
  enum class Kind { General, Factored };

  static AlgorithmForm general(OptimizerSpec optimizer, EstimatorSpec estimator);
  static AlgorithmForm factored(EstimatorSpec left, OptimizerSpec optimizer,
                                EstimatorSpec right);

  Kind kind() const { return kind_; }
  const OptimizerSpec& optimizer() const { return optimizer_; }
  const EstimatorSpec& estimator() const { return estimators_.front(); }  // General
  const EstimatorSpec& left() const { return estimators_.front(); }       // Factored
  const EstimatorSpec& right() const { return estimators_.back(); }       // Factored

 private:
  AlgorithmForm(Kind kind, OptimizerSpec opt, std::vector<EstimatorSpec> estimators);
  Kind kind_;
  OptimizerSpec optimizer_;
  std::vector<EstimatorSpec> estimators_;
};

/// A built algorithm over a graph: per-agent block states, stepped one
/// synchronized iteration at a time. Copyable; independent trials clone it.
class AlgorithmInstance {
 public:
  const LaplacianGraph& graph() const { return graph_; }
  int dimension() const { return d_; }
  long iteration() const { return k_; }
  long gradient_evals() const { return gradient_evals_; }
  AlgorithmForm::Kind kind() const { return kind_; }

  /// Executes one iteration: outputs from current states, gradients,
  /// Laplacian exchange, state advance. Returns the per-agent iterates y^k
  /// (entries of inactive agents hold their last value before dropping).
  const std::vector<Eigen::VectorXd>& step(const QuadraticProblem& problem);

  /// Schedules a topology change; throws if the event lies in the past.
  void apply_event(const NetworkEvent& event);

  /// Frobenius norm of the stacked optimizer states of active agents.
  double optimizer_state_norm() const;
  /// Largest state magnitude across all blocks and active agents.
  double max_state_norm() const;

  const std::vector<Eigen::VectorXd>& iterates() const { return iterates_; }

 private:
  friend AlgorithmInstance build(const AlgorithmForm&, const LaplacianGraph&, int);

  explicit AlgorithmInstance(LaplacianGraph graph) : graph_(std::move(graph)) {}

  // Estimator dynamics split by port group for the wiring loops.
  struct WiredEstimator {
    Eigen::MatrixXd A, Bw, Bv, Cy, Cz, Dzw;
    double Dyw = 0.0;
    int m = 0;

    void wire(const EstimatorBlock& block);
  };

  void drop_now(int agent);
  void exchange(std::vector<Eigen::MatrixXd>& z, std::vector<Eigen::MatrixXd>& v) const;

  AlgorithmForm::Kind kind_ = AlgorithmForm::Kind::Factored;
  LaplacianGraph graph_;
  int d_ = 0;
  long k_ = 0;
  long gradient_evals_ = 0;

  WiredEstimator est_left_, est_right_;  // General uses est_left_ only
  Eigen::MatrixXd opt_A_, opt_B_, opt_C_;

  std::vector<Eigen::MatrixXd> x_left_, x_right_, x_opt_;  // per agent, n_x x d
  std::vector<Eigen::MatrixXd> z_, v_;                     // per agent, m x d
  std::vector<Eigen::VectorXd> iterates_;
  std::deque<NetworkEvent> pending_;
};

/// Validates the form on the graph (balanced + strongly connected graph,
/// optimizer validity, estimator tracking order) and builds a zero-
/// initialized instance. Throws std::invalid_argument naming the failed
/// check otherwise.
AlgorithmInstance build(const AlgorithmForm& form, const LaplacianGraph& graph, int d);

using ProbeFn = std::function<void(long iteration, const AlgorithmInstance&)>;

/// Steps the instance `iters` times, applying events at their scheduled
/// iterations, and records the error metrics over active agents each
/// iteration. The probe, when given, runs after every iteration.
ErrorTrace run(AlgorithmInstance& instance, const QuadraticProblem& problem, long iters,
               const std::vector<NetworkEvent>& events = {}, const ProbeFn& probe = {});

}  // namespace distopt
