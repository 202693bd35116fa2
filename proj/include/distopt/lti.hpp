#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace distopt {

/// One rational transfer-function entry in z, coefficients highest degree
/// first. num/den are kept as given; leading zeros are ignored by queries.
struct RationalTf {
  Eigen::VectorXd num;
  Eigen::VectorXd den;
};

RationalTf rational(std::vector<double> num, std::vector<double> den);

/// Constant gain (pure feedthrough).
RationalTf constant_tf(double gain);

int degree(const Eigen::VectorXd& poly);
bool is_causal(const RationalTf& tf);
bool is_strictly_proper(const RationalTf& tf);

/// Roots of a polynomial via companion-matrix eigenvalues.
std::vector<std::complex<double>> polynomial_roots(const Eigen::VectorXd& poly);

/// Denominator roots after cancelling numerator roots that coincide within
/// cancel_tol.
std::vector<std::complex<double>> poles(const RationalTf& tf, double cancel_tol = 1e-10);

/// Matrix of rational entries describing a multi-port discrete-time LTI
/// system. Entry (i, j) maps input port j to output port i.
class TransferSpec {
 public:
  TransferSpec(int outputs, int inputs);
  static TransferSpec siso(RationalTf tf);

  int outputs() const { return outputs_; }
  int inputs() const { return inputs_; }
  RationalTf& entry(int out, int in);
  const RationalTf& entry(int out, int in) const;

 private:
  int outputs_, inputs_;
  std::vector<RationalTf> entries_;
};

bool is_strictly_proper(const TransferSpec& spec, int out, int in);

/// Pole multiset of the whole spec: entry poles merged with the maximum
/// multiplicity any single entry attains for each distinct root.
std::vector<std::complex<double>> poles(const TransferSpec& spec, double cancel_tol = 1e-10);

/// Discrete-time state-space dynamics x+ = A x + B u, y = C x + D u.
struct StateSpace {
  Eigen::MatrixXd A, B, C, D;

  int n_states() const { return static_cast<int>(A.rows()); }
  int n_inputs() const { return static_cast<int>(B.cols()); }
  int n_outputs() const { return static_cast<int>(C.rows()); }
};

/// Realizes a causal TransferSpec in controllable canonical form per scalar
/// channel, channels concatenated. Throws std::invalid_argument on
/// non-causal entries or zero denominators.
StateSpace realize(const TransferSpec& spec);
StateSpace realize(const RationalTf& tf);

/// Full cascade: all outputs of `first` drive the inputs of `second`.
StateSpace series(const StateSpace& first, const StateSpace& second);

/// Static gain block y = D u.
StateSpace static_block(const Eigen::MatrixXd& D);

/// A state-space system together with its internal state; step-at-a-time use.
class StateSpaceBlock {
 public:
  explicit StateSpaceBlock(StateSpace ss);

  const StateSpace& dynamics() const { return ss_; }
  const Eigen::VectorXd& state() const { return state_; }
  void set_state(const Eigen::VectorXd& x);
  void reset();

  /// Emits y^k and advances the state.
  Eigen::VectorXd step(const Eigen::VectorXd& u);

 private:
  StateSpace ss_;
  Eigen::VectorXd state_;
};

/// First `steps` Markov parameters h^0..h^{steps-1} of the map from input
/// port `in` to all outputs; row k holds h^k (impulse response from zero
/// state).
Eigen::MatrixXd impulse_response(const StateSpace& ss, int in, int steps);

}  // namespace distopt
