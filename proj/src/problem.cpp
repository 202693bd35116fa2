#include "distopt/problem.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace distopt {
namespace {

Eigen::VectorXd eigenvalue_grid(int d) {
  Eigen::VectorXd grid(d);
  if (d == 1) {
    grid(0) = 0.1;
    return grid;
  }
  for (int j = 0; j < d; ++j)
    grid(j) = 0.1 + 0.9 * static_cast<double>(j) / static_cast<double>(d - 1);
  return grid;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
// of R's diagonal fixed.
Eigen::MatrixXd haar_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

void check_agent(const QuadraticProblem& p, int agent) {
  if (agent < 0 || agent >= p.n) throw std::out_of_range("agent index out of range");
}

}  // namespace

QuadraticProblem sample(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("sample: n and d must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::VectorXd grid = eigenvalue_grid(d);

  QuadraticProblem p;
  p.n = n;
  p.d = d;
  p.A.reserve(static_cast<size_t>(n));
  p.b.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd Q = haar_orthogonal(d, rng);
    Eigen::MatrixXd A = Q * grid.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());  // enforce exact symmetry
    p.A.push_back(std::move(A));
    Eigen::VectorXd b(d);
    for (int j = 0; j < d; ++j) b(j) = gauss(rng);
    p.b.push_back(std::move(b));
  }
  return p;
}

Eigen::VectorXd gradient(const QuadraticProblem& p, int agent, const Eigen::VectorXd& y) {
  check_agent(p, agent);
  if (y.size() != p.d) throw std::invalid_argument("gradient: iterate has wrong dimension");
  return p.A[static_cast<size_t>(agent)] * y - p.b[static_cast<size_t>(agent)];
}

Eigen::VectorXd optimum(const QuadraticProblem& p, const std::vector<int>& agents) {
  if (agents.empty()) throw std::invalid_argument("optimum: no agents given");
  Eigen::MatrixXd A_sum = Eigen::MatrixXd::Zero(p.d, p.d);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(p.d);
  for (int i : agents) {
    check_agent(p, i);
    A_sum += p.A[static_cast<size_t>(i)];
    b_sum += p.b[static_cast<size_t>(i)];
  }
  const Eigen::VectorXd y = A_sum.ldlt().solve(b_sum);
  const double residual = (A_sum * y - b_sum).norm();
  if (!std::isfinite(residual) || residual > 1e-10)
    throw std::runtime_error("optimum: singular or ill-conditioned system (residual " +
                             std::to_string(residual) + ")");
  return y;
}

Eigen::VectorXd optimum(const QuadraticProblem& p) {
  std::vector<int> all(static_cast<size_t>(p.n));
  for (int i = 0; i < p.n; ++i) all[static_cast<size_t>(i)] = i;
  return optimum(p, all);
}

ErrorPair errors(const QuadraticProblem& p, const std::vector<Eigen::VectorXd>& iterates,
                 const std::vector<int>& agents) {
  if (agents.empty()) throw std::invalid_argument("errors: no agents given");
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(p.d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p.d);
  for (int i : agents) {
    check_agent(p, i);
    grad_sum += gradient(p, i, iterates.at(static_cast<size_t>(i)));
    mean += iterates[static_cast<size_t>(i)];
  }
  mean /= static_cast<double>(agents.size());
  double disagreement = 0.0;
  for (int i : agents) disagreement += (iterates[static_cast<size_t>(i)] - mean).norm();
  return ErrorPair{grad_sum.norm(), disagreement};
}

void save_problem(const QuadraticProblem& p, std::ostream& out) {
  char buf[32];
  const auto put = [&](double x, bool lead) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << (lead ? "" : " ") << buf;
  };
  out << p.n << ' ' << p.d << '\n';
  for (int i = 0; i < p.n; ++i) {
    for (int r = 0; r < p.d; ++r) {
      for (int c = 0; c < p.d; ++c) put(p.A[static_cast<size_t>(i)](r, c), c == 0);
      out << '\n';
    }
    for (int c = 0; c < p.d; ++c) put(p.b[static_cast<size_t>(i)](c), c == 0);
    out << '\n';
  }
}

QuadraticProblem load_problem(std::istream& in) {
  QuadraticProblem p;
  if (!(in >> p.n >> p.d) || p.n < 1 || p.d < 1)
    throw std::runtime_error("problem file: bad header");
  for (int i = 0; i < p.n; ++i) {
    Eigen::MatrixXd A(p.d, p.d);
    for (int r = 0; r < p.d; ++r)
      for (int c = 0; c < p.d; ++c)
        if (!(in >> A(r, c))) throw std::runtime_error("problem file: truncated matrix");
    Eigen::VectorXd b(p.d);
    for (int c = 0; c < p.d; ++c)
      if (!(in >> b(c))) throw std::runtime_error("problem file: truncated vector");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::runtime_error("problem file: matrix is not symmetric");
    p.A.push_back(std::move(A));
    p.b.push_back(std::move(b));
  }
  return p;
}

QuadraticProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  return load_problem(in);
}

}  // namespace distopt
