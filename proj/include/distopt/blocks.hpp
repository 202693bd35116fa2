#pragma once

#include "distopt/graph.hpp"
#include "distopt/lti.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace distopt {

/// Symbolic description of a consensus estimator. Compiled to a per-scalar
/// channel state-space block with ports (w, v_1..v_m) -> (y, z_1..z_m),
/// where m = comm_per_dim().
class EstimatorSpec {
 public:
  enum class Kind { P, AcceleratedP, PI, Series };

  /// Proportional estimator: y = w - x, x+ = x + v. No parameters.
  static EstimatorSpec p();

  /// P estimator with a momentum term on the integrator state.
  /// Requires k_I > 0 and 0 <= zeta < 1.
  static EstimatorSpec accelerated(double zeta, double k_I);

  /// Proportional-integral estimator; communicates both states (m = 2) and
  /// converges to the input average from any initialization.
  /// Requires k_p > 0, k_I > 0, 0 <= zeta < 1.
  static EstimatorSpec pi(double k_p, double k_I, double zeta);

  /// Two estimators in series on the w/y channel; each stage keeps its own
  /// communication ports, concatenated first-stage first.
  static EstimatorSpec series(EstimatorSpec first, EstimatorSpec second);

  Kind kind() const { return kind_; }
  double k_p() const { return k_p_; }
  double k_I() const { return k_I_; }
  double zeta() const { return zeta_; }
  const EstimatorSpec& stage(int i) const { return stages_.at(static_cast<size_t>(i)); }

  /// Communicated entries per vector dimension.
  int comm_per_dim() const;

 private:
  EstimatorSpec() = default;
  Kind kind_ = Kind::P;
  double k_p_ = 0.0, k_I_ = 0.0, zeta_ = 0.0;
  std::vector<EstimatorSpec> stages_;
};

/// Symbolic description of an LTI first-order optimization method.
class OptimizerSpec {
 public:
  enum class Kind { Gradient, GeneralFirstOrder };

  /// y+ = y - alpha * u. Requires alpha > 0.
  static OptimizerSpec gradient(double alpha);

  /// Transfer function -alpha (z + gamma (z - 1)) / ((z - beta)(z - 1));
  /// gamma = 0 gives the heavy-ball method. Requires alpha > 0,
  /// 0 <= beta < 1, gamma >= 0.
  static OptimizerSpec general_first_order(double alpha, double beta, double gamma);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

  /// SISO transfer function from gradient signal to evaluation point.
  TransferSpec transfer() const;

 private:
  OptimizerSpec() = default;
  Kind kind_ = Kind::Gradient;
  double alpha_ = 0.0, beta_ = 0.0, gamma_ = 0.0;
};

/// Compiled estimator: one scalar channel of the per-agent dynamics.
/// Input ports are ordered (w, v_1..v_m), output ports (y, z_1..z_m).
/// All library estimators have zero feedthrough from v to every output,
/// which keeps the communication exchange well posed.
struct EstimatorBlock {
  StateSpace ss;
  int comm_per_dim = 0;

  int n_states() const { return ss.n_states(); }
};

EstimatorBlock compile(const EstimatorSpec& spec);

/// Compiled optimizer: strictly proper SISO block from gradient to iterate.
struct OptimizerBlock {
  StateSpace ss;
};

OptimizerBlock compile(const OptimizerSpec& spec);

/// Steps one estimator replicated over the active agents of a graph with
/// scalar signals (one channel). Used by the estimator checks and tests.
class EstimatorSim {
 public:
  EstimatorSim(EstimatorBlock block, const LaplacianGraph& graph);

  /// One synchronized round: emits y from current states and input w, then
  /// exchanges z through the Laplacian and advances states. Entries of w and
  /// y for inactive agents are ignored/zero.
  Eigen::VectorXd step(const Eigen::VectorXd& w);

  /// States as an n_states x n matrix (column per agent).
  const Eigen::MatrixXd& states() const { return states_; }
  void set_states(const Eigen::MatrixXd& x);

  const EstimatorBlock& block() const { return block_; }

 private:
  EstimatorBlock block_;
  LaplacianGraph graph_;
  Eigen::MatrixXd states_;
};

/// Simulates the method on scalar quadratics (eps/2)(y - y*)^2 for each eps
/// and y* in {-1, 0, 10}; true iff every run reaches |y - y*| <= 1e-8 within
/// 1e5 iterations.
bool check_optimizer_validity(const OptimizerSpec& spec, std::span<const double> eps_list);

/// order 1: tracks the average of a randomly drawn constant input to 1e-8
/// within 1e4 rounds (zero-initialized states). order 2: same with inputs
/// c_i + k r_i whose deviations from the average are ramps (sum r_i = 0).
bool check_estimator_order(const EstimatorSpec& spec, const LaplacianGraph& graph,
                           int order, std::uint64_t seed = 0x5eed0'e57u);

}  // namespace distopt
