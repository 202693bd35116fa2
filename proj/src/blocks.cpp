#include "distopt/blocks.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace distopt {

EstimatorSpec EstimatorSpec::p() {
  EstimatorSpec spec;
  spec.kind_ = Kind::P;
  return spec;
}

EstimatorSpec EstimatorSpec::accelerated(double zeta, double k_I) {
  if (!(k_I > 0.0)) throw std::invalid_argument("accelerated estimator: k_I must be positive");
  if (!(zeta >= 0.0 && zeta < 1.0))
    throw std::invalid_argument("accelerated estimator: zeta must lie in [0, 1)");
  EstimatorSpec spec;
  spec.kind_ = Kind::AcceleratedP;
  spec.zeta_ = zeta;
  spec.k_I_ = k_I;
  return spec;
}

EstimatorSpec EstimatorSpec::pi(double k_p, double k_I, double zeta) {
  if (!(k_p > 0.0)) throw std::invalid_argument("PI estimator: k_p must be positive");
  if (!(k_I > 0.0)) throw std::invalid_argument("PI estimator: k_I must be positive");
  if (!(zeta >= 0.0 && zeta < 1.0))
    throw std::invalid_argument("PI estimator: zeta must lie in [0, 1)");
  EstimatorSpec spec;
  spec.kind_ = Kind::PI;
  spec.k_p_ = k_p;
  spec.k_I_ = k_I;
  spec.zeta_ = zeta;
  return spec;
}

EstimatorSpec EstimatorSpec::series(EstimatorSpec first, EstimatorSpec second) {
  EstimatorSpec spec;
  spec.kind_ = Kind::Series;
  spec.stages_.push_back(std::move(first));
  spec.stages_.push_back(std::move(second));
  return spec;
}

int EstimatorSpec::comm_per_dim() const {
  switch (kind_) {
    case Kind::P:
    case Kind::AcceleratedP:
      return 1;
    case Kind::PI:
      return 2;
    case Kind::Series:
      return stages_[0].comm_per_dim() + stages_[1].comm_per_dim();
  }
  return 0;
}

OptimizerSpec OptimizerSpec::gradient(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gradient method: alpha must be positive");
  OptimizerSpec spec;
  spec.kind_ = Kind::Gradient;
  spec.alpha_ = alpha;
  return spec;
}

OptimizerSpec OptimizerSpec::general_first_order(double alpha, double beta, double gamma) {
  if (!(alpha > 0.0)) throw std::invalid_argument("first-order method: alpha must be positive");
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("first-order method: beta must lie in [0, 1)");
  if (!(gamma >= 0.0)) throw std::invalid_argument("first-order method: gamma must be nonnegative");
  OptimizerSpec spec;
  spec.kind_ = Kind::GeneralFirstOrder;
  spec.alpha_ = alpha;
  spec.beta_ = beta;
  spec.gamma_ = gamma;
  return spec;
}

TransferSpec OptimizerSpec::transfer() const {
  switch (kind_) {
    case Kind::Gradient:
      return TransferSpec::siso(rational({-alpha_}, {1.0, -1.0}));
    case Kind::GeneralFirstOrder:
      // -alpha (z + gamma (z - 1)) over (z - beta)(z - 1)
      return TransferSpec::siso(rational({-alpha_ * (1.0 + gamma_), alpha_ * gamma_},
                                         {1.0, -(1.0 + beta_), beta_}));
  }
  throw std::logic_error("unreachable optimizer kind");
}

namespace {

// Composes two estimator channels in series on the w/y channel while
// exposing both stages' communication ports:
//   inputs  (w, v1, v2), outputs (y, z1, z2).
EstimatorBlock series_blocks(const EstimatorBlock& s1, const EstimatorBlock& s2) {
  const int m1 = s1.comm_per_dim;
  const int m2 = s2.comm_per_dim;
  const int n1 = s1.n_states();
  const int n2 = s2.n_states();
  const auto& a = s1.ss;
  const auto& b = s2.ss;

  // Stage port slices.
  const auto Bw = [](const StateSpace& ss) { return ss.B.col(0); };
  const auto Bv = [](const StateSpace& ss, int m) { return ss.B.rightCols(m); };
  const auto Cy = [](const StateSpace& ss) { return ss.C.row(0); };
  const auto Cz = [](const StateSpace& ss, int m) { return ss.C.bottomRows(m); };
  const auto Dyw = [](const StateSpace& ss) { return ss.D(0, 0); };
  const auto Dzw = [](const StateSpace& ss, int m) { return ss.D.col(0).tail(m); };

  EstimatorBlock out;
  out.comm_per_dim = m1 + m2;
  const int nu = 1 + m1 + m2;
  const int ny = 1 + m1 + m2;
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  ss.B = Eigen::MatrixXd::Zero(n1 + n2, nu);
  ss.C = Eigen::MatrixXd::Zero(ny, n1 + n2);
  ss.D = Eigen::MatrixXd::Zero(ny, nu);

  // x1+ = A1 x1 + B1w w + B1v v1
  ss.A.topLeftCorner(n1, n1) = a.A;
  ss.B.block(0, 0, n1, 1) = Bw(a);
  ss.B.block(0, 1, n1, m1) = Bv(a, m1);
  // x2+ = A2 x2 + B2w y1 + B2v v2, with y1 = C1y x1 + D1yw w (no v feedthrough)
  ss.A.bottomRightCorner(n2, n2) = b.A;
  ss.A.bottomLeftCorner(n2, n1) = Bw(b) * Cy(a);
  ss.B.block(n1, 0, n2, 1) = Bw(b) * Dyw(a);
  ss.B.block(n1, 1 + m1, n2, m2) = Bv(b, m2);
  // y = C2y x2 + D2yw y1
  ss.C.block(0, 0, 1, n1) = Dyw(b) * Cy(a);
  ss.C.block(0, n1, 1, n2) = Cy(b);
  ss.D(0, 0) = Dyw(b) * Dyw(a);
  // z1 = C1z x1 + D1zw w
  ss.C.block(1, 0, m1, n1) = Cz(a, m1);
  ss.D.block(1, 0, m1, 1) = Dzw(a, m1);
  // z2 = C2z x2 + D2zw y1
  ss.C.block(1 + m1, n1, m2, n2) = Cz(b, m2);
  ss.C.block(1 + m1, 0, m2, n1) = Dzw(b, m2) * Cy(a);
  ss.D.block(1 + m1, 0, m2, 1) = Dzw(b, m2) * Dyw(a);

  out.ss = std::move(ss);
  return out;
}

}  // namespace

EstimatorBlock compile(const EstimatorSpec& spec) {
  EstimatorBlock block;
  switch (spec.kind()) {
    case EstimatorSpec::Kind::P: {
      // y = w - x, z = y, x+ = x + v
      block.comm_per_dim = 1;
      block.ss.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
      block.ss.B = (Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished();
      block.ss.C = (Eigen::MatrixXd(2, 1) << -1.0, -1.0).finished();
      block.ss.D = (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 1.0, 0.0).finished();
      break;
    }
    case EstimatorSpec::Kind::AcceleratedP: {
      // y = w - x, z = y
      // x+ = x + k_I v + zeta (x - p), p+ = x
      const double z = spec.zeta();
      const double ki = spec.k_I();
      block.comm_per_dim = 1;
      block.ss.A = (Eigen::MatrixXd(2, 2) << 1.0 + z, -z, 1.0, 0.0).finished();
      block.ss.B = (Eigen::MatrixXd(2, 2) << 0.0, ki, 0.0, 0.0).finished();
      block.ss.C = (Eigen::MatrixXd(2, 2) << -1.0, 0.0, -1.0, 0.0).finished();
      block.ss.D = (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 1.0, 0.0).finished();
      break;
    }
    case EstimatorSpec::Kind::PI: {
      // y = x, z = (x, q)
      // x+ = zeta x + (1 - zeta) w - k_p v_x + k_I v_q
      // q+ = q - k_I v_x
      const double z = spec.zeta();
      const double kp = spec.k_p();
      const double ki = spec.k_I();
      block.comm_per_dim = 2;
      block.ss.A = (Eigen::MatrixXd(2, 2) << z, 0.0, 0.0, 1.0).finished();
      block.ss.B = (Eigen::MatrixXd(2, 3) << 1.0 - z, -kp, ki, 0.0, -ki, 0.0).finished();
      block.ss.C = (Eigen::MatrixXd(3, 2) << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0).finished();
      block.ss.D = Eigen::MatrixXd::Zero(3, 3);
      break;
    }
    case EstimatorSpec::Kind::Series: {
      block = series_blocks(compile(spec.stage(0)), compile(spec.stage(1)));
      break;
    }
  }
  // The engine relies on outputs having no feedthrough from v.
  if (block.ss.D.rightCols(block.comm_per_dim).cwiseAbs().maxCoeff() != 0.0)
    throw std::logic_error("estimator feedthrough from v must be zero");
  return block;
}

OptimizerBlock compile(const OptimizerSpec& spec) {
  OptimizerBlock block;
  block.ss = realize(spec.transfer());
  if (block.ss.D.cwiseAbs().maxCoeff() != 0.0)
    throw std::logic_error("optimizer block must be strictly proper");
  return block;
}

EstimatorSim::EstimatorSim(EstimatorBlock block, const LaplacianGraph& graph)
    : block_(std::move(block)), graph_(graph),
      states_(Eigen::MatrixXd::Zero(block_.n_states(), graph.size())) {}

void EstimatorSim::set_states(const Eigen::MatrixXd& x) {
  if (x.rows() != states_.rows() || x.cols() != states_.cols())
    throw std::invalid_argument("set_states: wrong shape");
  states_ = x;
}

Eigen::VectorXd EstimatorSim::step(const Eigen::VectorXd& w) {
  const int n = graph_.size();
  const int m = block_.comm_per_dim;
  if (w.size() != n) throw std::invalid_argument("step: one input entry per agent expected");
  const auto& ss = block_.ss;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd z_rows = Eigen::MatrixXd::Zero(n, m);
  for (int i = 0; i < n; ++i) {
    if (!graph_.is_active(i)) continue;
    const Eigen::VectorXd x = states_.col(i);
    y(i) = (ss.C.row(0) * x)(0) + ss.D(0, 0) * w(i);
    z_rows.row(i) = (ss.C.bottomRows(m) * x + ss.D.col(0).tail(m) * w(i)).transpose();
  }
  const Eigen::MatrixXd v_rows = apply_rows(graph_, z_rows);
  for (int i = 0; i < n; ++i) {
    if (!graph_.is_active(i)) continue;
    Eigen::VectorXd u(1 + m);
    u(0) = w(i);
    u.tail(m) = v_rows.row(i).transpose();
    states_.col(i) = ss.A * states_.col(i) + ss.B * u;
  }
  return y;
}

bool check_optimizer_validity(const OptimizerSpec& spec, std::span<const double> eps_list) {
  if (eps_list.empty()) throw std::invalid_argument("check_optimizer_validity: empty eps list");
  for (const double eps : eps_list)
    if (!(eps > 0.0)) throw std::invalid_argument("check_optimizer_validity: eps must be positive");

  const OptimizerBlock block = compile(spec);
  constexpr double kTol = 1e-8;
  constexpr long kMaxIters = 100000;
  for (const double eps : eps_list) {
    for (const double target : {-1.0, 0.0, 10.0}) {
      StateSpaceBlock sim(block.ss);
      bool converged = false;
      double y = 0.0;
      for (long k = 0; k < kMaxIters; ++k) {
        // Strictly proper: current output depends on the state only.
        y = (block.ss.C * sim.state())(0);
        if (std::abs(y - target) <= kTol) {
          converged = true;
          break;
        }
        if (!std::isfinite(y) || std::abs(y) > 1e12) break;
        const double grad = eps * (y - target);
        sim.step(Eigen::VectorXd::Constant(1, grad));
      }
      if (!converged) return false;
    }
  }
  return true;
}

bool check_estimator_order(const EstimatorSpec& spec, const LaplacianGraph& graph,
                           int order, std::uint64_t seed) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("check_estimator_order: order must be 1 or 2");
  const auto active = graph.active_agents();
  const int n = graph.size();
  const auto n_active = static_cast<double>(active.size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (int i : active) c(i) = gauss(rng);
  if (order == 2) {
    for (int i : active) r(i) = gauss(rng);
    double mean = 0.0;
    for (int i : active) mean += r(i);
    mean /= n_active;
    for (int i : active) r(i) -= mean;  // deviations from the average are ramps
  }

  EstimatorSim sim(compile(spec), graph);
  constexpr double kTol = 1e-8;
  constexpr int kMaxRounds = 10000;
  for (int k = 0; k < kMaxRounds; ++k) {
    const Eigen::VectorXd w = c + static_cast<double>(k) * r;
    double avg = 0.0;
    for (int i : active) avg += w(i);
    avg /= n_active;
    const Eigen::VectorXd y = sim.step(w);
    double err2 = 0.0;
    for (int i : active) err2 += (y(i) - avg) * (y(i) - avg);
    if (std::sqrt(err2) <= kTol) return true;
  }
  return false;
}

}  // namespace distopt
