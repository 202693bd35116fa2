#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace distopt {

/// Distributed least-squares instance: agent i owns the quadratic
/// f_i(y) = 1/2 y^T A_i y - b_i^T y with A_i symmetric positive definite.
/// Immutable after sampling.
struct QuadraticProblem {
  int n = 0;
  int d = 0;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> b;
};

/// Samples a problem: A_i = Q_i diag(grid) Q_i^T with the eigenvalue grid
/// evenly spaced on [1/10, 1] (d = 1 degenerates to {1/10}) and Q_i Haar
/// orthogonal; b_i entries are standard normal. Deterministic in the seed.
QuadraticProblem sample(int n, int d, std::uint64_t seed);

Eigen::VectorXd gradient(const QuadraticProblem& p, int agent, const Eigen::VectorXd& y);

/// Exact optimum over the given agents: solves (sum A_i) y = sum b_i and
/// verifies the summed-gradient residual is below 1e-10.
Eigen::VectorXd optimum(const QuadraticProblem& p, const std::vector<int>& agents);
Eigen::VectorXd optimum(const QuadraticProblem& p);

struct ErrorPair {
  double e_opt = 0.0;
  double e_con = 0.0;

  double total() const { return e_opt > e_con ? e_opt : e_con; }
};

/// e_opt = || sum_i grad f_i(y_i) ||, e_con = sum_i || y_i - mean(y) ||,
/// both over the given agents only.
ErrorPair errors(const QuadraticProblem& p, const std::vector<Eigen::VectorXd>& iterates,
                 const std::vector<int>& agents);

/// Per-iteration error record of one simulated trial.
struct TraceRecord {
  long iteration = 0;
  double e_opt = 0.0;
  double e_con = 0.0;
  double e_total = 0.0;
};

struct ErrorTrace {
  std::string scenario;
  std::string variant;
  long trial = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
};

/// Plain-text round trip: "n d" header, then per agent the rows of A_i
/// followed by b_i, 17 significant digits.
void save_problem(const QuadraticProblem& p, std::ostream& out);
QuadraticProblem load_problem(std::istream& in);
QuadraticProblem load_problem_file(const std::string& path);

}  // namespace distopt
