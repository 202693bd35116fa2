#include "distopt/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace distopt {

AlgorithmForm::AlgorithmForm(Kind kind, OptimizerSpec opt, std::vector<EstimatorSpec> estimators)
    : kind_(kind), optimizer_(std::move(opt)), estimators_(std::move(estimators)) {}

AlgorithmForm AlgorithmForm::general(OptimizerSpec optimizer, EstimatorSpec estimator) {
  return AlgorithmForm(Kind::General, std::move(optimizer), {std::move(estimator)});
}

AlgorithmForm AlgorithmForm::factored(EstimatorSpec left, OptimizerSpec optimizer,
                                      EstimatorSpec right) {
  return AlgorithmForm(Kind::Factored, std::move(optimizer),
                       {std::move(left), std::move(right)});
}

void AlgorithmInstance::WiredEstimator::wire(const EstimatorBlock& block) {
  m = block.comm_per_dim;
  A = block.ss.A;
  Bw = block.ss.B.col(0);
  Bv = block.ss.B.rightCols(m);
  Cy = block.ss.C.row(0);
  Cz = block.ss.C.bottomRows(m);
  Dzw = block.ss.D.col(0).tail(m);
  Dyw = block.ss.D(0, 0);
}

void AlgorithmInstance::drop_now(int agent) {
  graph_ = drop_agent(graph_, agent);
  z_[static_cast<size_t>(agent)].setZero();
}

void AlgorithmInstance::exchange(std::vector<Eigen::MatrixXd>& z,
                                 std::vector<Eigen::MatrixXd>& v) const {
  const int n = graph_.size();
  for (int i = 0; i < n; ++i) {
    if (!graph_.is_active(i)) continue;
    auto& vi = v[static_cast<size_t>(i)];
    vi.setZero();
    for (int j = 0; j < n; ++j) {
      const double a = graph_.weight(i, j);
      if (a == 0.0) continue;
      vi += a * (z[static_cast<size_t>(i)] - z[static_cast<size_t>(j)]);
    }
  }
}

const std::vector<Eigen::VectorXd>& AlgorithmInstance::step(const QuadraticProblem& problem) {
  if (problem.n != graph_.size() || problem.d != d_)
    throw std::invalid_argument("step: problem does not match the instance");

  while (!pending_.empty() && pending_.front().iteration <= k_) {
    drop_now(pending_.front().agent);
    pending_.pop_front();
  }

  const int n = graph_.size();
  const bool factored = kind_ == AlgorithmForm::Kind::Factored;
  const int m_left = est_left_.m;

  for (int i = 0; i < n; ++i) {
    if (!graph_.is_active(i)) continue;
    const auto idx = static_cast<size_t>(i);

    // Outputs from current states. The optimizer is strictly proper and the
    // estimators have no feedthrough from v, so the evaluation order below
    // is well posed.
    const Eigen::MatrixXd w = opt_C_ * x_opt_[idx];                               // 1 x d
    const Eigen::MatrixXd y = est_left_.Cy * x_left_[idx] + est_left_.Dyw * w;    // 1 x d
    iterates_[idx] = y.row(0).transpose();

    // Gradient evaluation, one per active agent per iteration.
    const Eigen::VectorXd u = gradient(problem, i, iterates_[idx]);
    ++gradient_evals_;
    const Eigen::MatrixXd u_row = u.transpose();

    auto& z = z_[idx];
    z.topRows(m_left) = est_left_.Cz * x_left_[idx] + est_left_.Dzw * w;
    if (factored) {
      z.bottomRows(est_right_.m) = est_right_.Cz * x_right_[idx] + est_right_.Dzw * u_row;
      // Averaged gradient estimate drives the optimizer.
      const Eigen::MatrixXd r = est_right_.Cy * x_right_[idx] + est_right_.Dyw * u_row;
      x_opt_[idx] = opt_A_ * x_opt_[idx] + opt_B_ * r;
      x_right_[idx] = est_right_.A * x_right_[idx] + est_right_.Bw * u_row;
    } else {
      x_opt_[idx] = opt_A_ * x_opt_[idx] + opt_B_ * u_row;
    }
    x_left_[idx] = est_left_.A * x_left_[idx] + est_left_.Bw * w;
  }

  // Communication round: v = (L (x) I) z, then the v-driven state updates.
  exchange(z_, v_);
  for (int i = 0; i < n; ++i) {
    if (!graph_.is_active(i)) continue;
    const auto idx = static_cast<size_t>(i);
    x_left_[idx] += est_left_.Bv * v_[idx].topRows(m_left);
    if (factored) x_right_[idx] += est_right_.Bv * v_[idx].bottomRows(est_right_.m);
  }

  ++k_;
  return iterates_;
}

void AlgorithmInstance::apply_event(const NetworkEvent& event) {
  if (event.agent < 0 || event.agent >= graph_.size())
    throw std::out_of_range("apply_event: agent index out of range");
  if (event.iteration < k_)
    throw std::invalid_argument("apply_event: event iteration lies in the past");
  pending_.push_back(event);
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const NetworkEvent& a, const NetworkEvent& b) {
                     return a.iteration < b.iteration;
                   });
}

double AlgorithmInstance::optimizer_state_norm() const {
  double sq = 0.0;
  for (int i = 0; i < graph_.size(); ++i)
    if (graph_.is_active(i)) sq += x_opt_[static_cast<size_t>(i)].squaredNorm();
  return std::sqrt(sq);
}

double AlgorithmInstance::max_state_norm() const {
  double mx = 0.0;
  for (int i = 0; i < graph_.size(); ++i) {
    if (!graph_.is_active(i)) continue;
    const auto idx = static_cast<size_t>(i);
    mx = std::max(mx, x_opt_[idx].size() ? x_opt_[idx].cwiseAbs().maxCoeff() : 0.0);
    mx = std::max(mx, x_left_[idx].size() ? x_left_[idx].cwiseAbs().maxCoeff() : 0.0);
    if (kind_ == AlgorithmForm::Kind::Factored)
      mx = std::max(mx, x_right_[idx].size() ? x_right_[idx].cwiseAbs().maxCoeff() : 0.0);
  }
  return mx;
}

AlgorithmInstance build(const AlgorithmForm& form, const LaplacianGraph& graph, int d) {
  if (d < 1) throw std::invalid_argument("build: dimension must be positive");
  if (!is_balanced(graph)) throw std::invalid_argument("build: graph is not balanced");
  if (!is_connected(graph))
    throw std::invalid_argument("build: graph is not strongly connected");

  constexpr std::array<double, 2> kEps{0.1, 1.0};
  if (!check_optimizer_validity(form.optimizer(), kEps))
    throw std::invalid_argument("build: optimizer failed the validity check");

  const bool factored = form.kind() == AlgorithmForm::Kind::Factored;
  if (factored) {
    if (!check_estimator_order(form.left(), graph, 1))
      throw std::invalid_argument("build: left estimator failed the first-order tracking check");
    if (!check_estimator_order(form.right(), graph, 1))
      throw std::invalid_argument("build: right estimator failed the first-order tracking check");
  } else {
    if (!check_estimator_order(form.estimator(), graph, 2))
      throw std::invalid_argument(
          "build: estimator failed the second-order tracking check");
  }

  AlgorithmInstance inst(graph);
  inst.kind_ = form.kind();
  inst.d_ = d;

  const OptimizerBlock opt = compile(form.optimizer());
  inst.opt_A_ = opt.ss.A;
  inst.opt_B_ = opt.ss.B;
  inst.opt_C_ = opt.ss.C;

  inst.est_left_.wire(compile(factored ? form.left() : form.estimator()));
  int m_total = inst.est_left_.m;
  if (factored) {
    inst.est_right_.wire(compile(form.right()));
    m_total += inst.est_right_.m;
  }

  const auto n = static_cast<size_t>(graph.size());
  inst.x_left_.assign(n, Eigen::MatrixXd::Zero(inst.est_left_.A.rows(), d));
  inst.x_opt_.assign(n, Eigen::MatrixXd::Zero(inst.opt_A_.rows(), d));
  if (factored)
    inst.x_right_.assign(n, Eigen::MatrixXd::Zero(inst.est_right_.A.rows(), d));
  inst.z_.assign(n, Eigen::MatrixXd::Zero(m_total, d));
  inst.v_.assign(n, Eigen::MatrixXd::Zero(m_total, d));
  inst.iterates_.assign(n, Eigen::VectorXd::Zero(d));
  return inst;
}

ErrorTrace run(AlgorithmInstance& instance, const QuadraticProblem& problem, long iters,
               const std::vector<NetworkEvent>& events, const ProbeFn& probe) {
  if (iters < 1) throw std::invalid_argument("run: iteration count must be positive");
  for (const auto& e : events) instance.apply_event(e);

  ErrorTrace trace;
  trace.records.reserve(static_cast<size_t>(iters));
  for (long i = 0; i < iters; ++i) {
    const auto& ys = instance.step(problem);
    const auto active = instance.graph().active_agents();
    const ErrorPair e = errors(problem, ys, active);
    trace.records.push_back({instance.iteration() - 1, e.e_opt, e.e_con, e.total()});
    if (probe) probe(instance.iteration() - 1, instance);
  }
  return trace;
}

}  // namespace distopt
