#include "distopt/lti.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distopt {
namespace {

// Strips leading (highest-degree) zero coefficients; keeps at least one.
Eigen::VectorXd trim(const Eigen::VectorXd& poly) {
  Eigen::Index first = 0;
  while (first < poly.size() - 1 && poly(first) == 0.0) ++first;
  return poly.tail(poly.size() - first);
}

}  // namespace

RationalTf rational(std::vector<double> num, std::vector<double> den) {
  if (num.empty() || den.empty())
    throw std::invalid_argument("rational: empty coefficient list");
  RationalTf tf;
  tf.num = Eigen::Map<Eigen::VectorXd>(num.data(), static_cast<Eigen::Index>(num.size()));
  tf.den = Eigen::Map<Eigen::VectorXd>(den.data(), static_cast<Eigen::Index>(den.size()));
  return tf;
}

RationalTf constant_tf(double gain) { return rational({gain}, {1.0}); }

int degree(const Eigen::VectorXd& poly) {
  return static_cast<int>(trim(poly).size()) - 1;
}

bool is_causal(const RationalTf& tf) {
  if (trim(tf.den).cwiseAbs().maxCoeff() == 0.0) return false;
  if (tf.num.cwiseAbs().maxCoeff() == 0.0) return true;  // zero entry
  return degree(tf.num) <= degree(tf.den);
}

bool is_strictly_proper(const RationalTf& tf) {
  if (tf.num.cwiseAbs().maxCoeff() == 0.0) return true;
  return degree(tf.num) < degree(tf.den);
}

std::vector<std::complex<double>> polynomial_roots(const Eigen::VectorXd& poly) {
  const Eigen::VectorXd p = trim(poly);
  if (p.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("polynomial_roots: zero polynomial");
  const Eigen::Index deg = p.size() - 1;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  companion.row(0) = (-p.tail(deg) / p(0)).transpose();
  if (deg > 1)
    companion.block(1, 0, deg - 1, deg - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> roots(static_cast<size_t>(deg));
  for (Eigen::Index i = 0; i < deg; ++i) roots[static_cast<size_t>(i)] = solver.eigenvalues()(i);
  // Deterministic order for multiset comparisons.
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

std::vector<std::complex<double>> poles(const RationalTf& tf, double cancel_tol) {
  if (!is_causal(tf)) throw std::invalid_argument("poles: non-causal transfer function");
  auto den_roots = polynomial_roots(tf.den);
  if (tf.num.cwiseAbs().maxCoeff() == 0.0) return {};
  auto num_roots = polynomial_roots(tf.num);
  std::vector<std::complex<double>> remaining;
  for (const auto& p : den_roots) {
    auto hit = std::find_if(num_roots.begin(), num_roots.end(),
                            [&](const auto& z) { return std::abs(z - p) <= cancel_tol; });
    if (hit != num_roots.end())
      num_roots.erase(hit);
    else
      remaining.push_back(p);
  }
  return remaining;
}

TransferSpec::TransferSpec(int outputs, int inputs)
    : outputs_(outputs), inputs_(inputs),
      entries_(static_cast<size_t>(outputs) * static_cast<size_t>(inputs), constant_tf(0.0)) {
  if (outputs < 1 || inputs < 1)
    throw std::invalid_argument("TransferSpec: port counts must be positive");
}

TransferSpec TransferSpec::siso(RationalTf tf) {
  TransferSpec spec(1, 1);
  spec.entry(0, 0) = std::move(tf);
  return spec;
}

RationalTf& TransferSpec::entry(int out, int in) {
  return entries_[static_cast<size_t>(out) * static_cast<size_t>(inputs_) + static_cast<size_t>(in)];
}

const RationalTf& TransferSpec::entry(int out, int in) const {
  return entries_[static_cast<size_t>(out) * static_cast<size_t>(inputs_) + static_cast<size_t>(in)];
}

bool is_strictly_proper(const TransferSpec& spec, int out, int in) {
  return is_strictly_proper(spec.entry(out, in));
}

std::vector<std::complex<double>> poles(const TransferSpec& spec, double cancel_tol) {
  // Cluster roots across entries; multiplicity of a pole is the max
  // multiplicity any entry gives it.
  std::vector<std::pair<std::complex<double>, int>> clusters;
  for (int i = 0; i < spec.outputs(); ++i) {
    for (int j = 0; j < spec.inputs(); ++j) {
      std::vector<std::pair<std::complex<double>, int>> local;
      for (const auto& p : poles(spec.entry(i, j), cancel_tol)) {
        auto hit = std::find_if(local.begin(), local.end(), [&](const auto& c) {
          return std::abs(c.first - p) <= 1e-8;
        });
        if (hit != local.end())
          ++hit->second;
        else
          local.emplace_back(p, 1);
      }
      for (const auto& [root, mult] : local) {
        auto hit = std::find_if(clusters.begin(), clusters.end(), [&](const auto& c) {
          return std::abs(c.first - root) <= 1e-8;
        });
        if (hit != clusters.end())
          hit->second = std::max(hit->second, mult);
        else
          clusters.emplace_back(root, mult);
      }
    }
  }
  std::vector<std::complex<double>> out;
  for (const auto& [root, mult] : clusters)
    for (int k = 0; k < mult; ++k) out.push_back(root);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

namespace {

// Controllable canonical form of a single causal rational entry.
StateSpace realize_entry(const RationalTf& tf) {
  if (!is_causal(tf))
    throw std::invalid_argument("realize: non-causal transfer function entry");
  Eigen::VectorXd den = trim(tf.den);
  Eigen::VectorXd num = trim(tf.num);
  const double lead = den(0);
  den /= lead;
  num /= lead;

  const Eigen::Index p = den.size() - 1;  // state dimension
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  b.tail(num.size()) = num;  // pad to denominator length

  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(p, p);
  ss.B = Eigen::MatrixXd::Zero(p, 1);
  ss.C = Eigen::MatrixXd::Zero(1, p);
  ss.D = Eigen::MatrixXd::Zero(1, 1);
  ss.D(0, 0) = b(0);
  if (p > 0) {
    ss.A.row(0) = -den.tail(p).transpose();
    if (p > 1) ss.A.block(1, 0, p - 1, p - 1).setIdentity();
    ss.B(0, 0) = 1.0;
    ss.C = (b.tail(p) - b(0) * den.tail(p)).transpose();
  }
  return ss;
}

}  // namespace

StateSpace realize(const RationalTf& tf) { return realize_entry(tf); }

StateSpace realize(const TransferSpec& spec) {
  const int ny = spec.outputs();
  const int nu = spec.inputs();
  std::vector<StateSpace> channels;
  std::vector<std::pair<int, int>> ports;
  int total_states = 0;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nu; ++j) {
      const auto& tf = spec.entry(i, j);
      if (tf.num.cwiseAbs().maxCoeff() == 0.0) continue;  // structural zero
      StateSpace ch = realize_entry(tf);
      total_states += ch.n_states();
      channels.push_back(std::move(ch));
      ports.emplace_back(i, j);
    }
  }
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(total_states, total_states);
  ss.B = Eigen::MatrixXd::Zero(total_states, nu);
  ss.C = Eigen::MatrixXd::Zero(ny, total_states);
  ss.D = Eigen::MatrixXd::Zero(ny, nu);
  int offset = 0;
  for (size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    const auto [i, j] = ports[c];
    const int p = ch.n_states();
    ss.A.block(offset, offset, p, p) = ch.A;
    ss.B.block(offset, j, p, 1) = ch.B;
    ss.C.block(i, offset, 1, p) = ch.C;
    ss.D(i, j) += ch.D(0, 0);
    offset += p;
  }
  return ss;
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  if (first.n_outputs() != second.n_inputs())
    throw std::invalid_argument("series: cascaded port counts are incompatible");
  const int n1 = first.n_states();
  const int n2 = second.n_states();
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  ss.A.topLeftCorner(n1, n1) = first.A;
  ss.A.bottomLeftCorner(n2, n1) = second.B * first.C;
  ss.A.bottomRightCorner(n2, n2) = second.A;
  ss.B = Eigen::MatrixXd::Zero(n1 + n2, first.n_inputs());
  ss.B.topRows(n1) = first.B;
  ss.B.bottomRows(n2) = second.B * first.D;
  ss.C = Eigen::MatrixXd::Zero(second.n_outputs(), n1 + n2);
  ss.C.leftCols(n1) = second.D * first.C;
  ss.C.rightCols(n2) = second.C;
  ss.D = second.D * first.D;
  return ss;
}

StateSpace static_block(const Eigen::MatrixXd& D) {
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(0, 0);
  ss.B = Eigen::MatrixXd::Zero(0, D.cols());
  ss.C = Eigen::MatrixXd::Zero(D.rows(), 0);
  ss.D = D;
  return ss;
}

StateSpaceBlock::StateSpaceBlock(StateSpace ss)
    : ss_(std::move(ss)), state_(Eigen::VectorXd::Zero(ss_.n_states())) {}

void StateSpaceBlock::set_state(const Eigen::VectorXd& x) {
  if (x.size() != state_.size())
    throw std::invalid_argument("set_state: wrong state dimension");
  state_ = x;
}

void StateSpaceBlock::reset() { state_.setZero(); }

Eigen::VectorXd StateSpaceBlock::step(const Eigen::VectorXd& u) {
  if (u.size() != ss_.B.cols())
    throw std::invalid_argument("step: wrong input dimension");
  Eigen::VectorXd y = ss_.C * state_ + ss_.D * u;
  state_ = ss_.A * state_ + ss_.B * u;
  return y;
}

Eigen::MatrixXd impulse_response(const StateSpace& ss, int in, int steps) {
  if (in < 0 || in >= ss.n_inputs())
    throw std::invalid_argument("impulse_response: input port out of range");
  Eigen::MatrixXd out(steps, ss.n_outputs());
  StateSpaceBlock block(ss);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ss.n_inputs());
  for (int k = 0; k < steps; ++k) {
    if (k == 0) u(in) = 1.0;
    out.row(k) = block.step(u).transpose();
    if (k == 0) u(in) = 0.0;
  }
  return out;
}

}  // namespace distopt
