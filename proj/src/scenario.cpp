#include "distopt/scenario.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

namespace distopt {

ScenarioConfig scenario_preset(const std::string& name) {
  ScenarioConfig c;
  c.scenario = name;
  if (name == "custom") return c;

  const auto p = EstimatorSpec::p();
  const auto grad = OptimizerSpec::gradient(0.25);
  if (name == "fig6") {
    c.iterations = 1000;
    c.variants.push_back({"general", AlgorithmForm::general(grad, EstimatorSpec::series(p, p))});
  } else if (name == "fig7") {
    // Long horizon on a single trial; the general form's optimizer states
    // ramp and erode the error floor while the factored form stays put.
    c.iterations = 100000;
    c.trials = 1;
    c.variants.push_back({"general", AlgorithmForm::general(grad, EstimatorSpec::series(p, p))});
    c.variants.push_back({"factored", AlgorithmForm::factored(p, grad, p)});
  } else if (name == "fig10") {
    c.iterations = 2000;
    const auto accel_est = EstimatorSpec::accelerated(0.1, 1.1);
    const auto accel_opt = OptimizerSpec::general_first_order(0.1, 0.8, 0.0);
    c.variants.push_back({"baseline", AlgorithmForm::factored(p, grad, p)});
    c.variants.push_back({"accelerated", AlgorithmForm::factored(accel_est, accel_opt, accel_est)});
  } else if (name == "fig13") {
    c.iterations = 2500;
    const auto pi = EstimatorSpec::pi(1.0, 0.5, 0.95);
    c.variants.push_back({"factored-p", AlgorithmForm::factored(p, grad, p)});
    c.variants.push_back({"factored-pi", AlgorithmForm::factored(p, grad, pi)});
    c.events.push_back({0, 200});  // agent 1 leaves at iteration 200
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return c;
}

LaplacianGraph scenario_graph(const ScenarioConfig& config) {
  if (config.graph_source == "fig2") return fig2_graph();
  constexpr std::string_view kFilePrefix = "file:";
  if (config.graph_source.rfind(kFilePrefix, 0) == 0)
    return load_graph_file(config.graph_source.substr(kFilePrefix.size()));
  return load_graph_file(config.graph_source);
}

std::uint64_t trial_seed(std::uint64_t master_seed, long trial) {
  // splitmix64 finalizer on the (seed, trial) pair.
  std::uint64_t x = master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

ScenarioResult run_scenario(const ScenarioConfig& config, int threads) {
  if (config.trials < 1) throw std::invalid_argument("trials must be positive");
  if (config.iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (config.variants.empty()) throw std::invalid_argument("scenario defines no variants");

  const LaplacianGraph graph = scenario_graph(config);
  if (graph.size() != config.agents)
    throw std::invalid_argument("graph size does not match the configured agent count");

  std::optional<QuadraticProblem> pinned;
  if (config.problem_file) {
    pinned = load_problem_file(*config.problem_file);
    if (pinned->n != config.agents || pinned->d != config.dimension)
      throw std::invalid_argument("pinned problem does not match the configured sizes");
    if (config.trials != 1)
      throw std::invalid_argument("problem_file requires trials = 1");
  }

  // Validate every variant once up front so configuration errors surface
  // before any trial runs.
  for (const auto& v : config.variants) (void)build(v.form, graph, config.dimension);

  ScenarioResult result;
  result.config = config;
  result.traces.resize(config.variants.size());
  for (auto& t : result.traces) t.resize(static_cast<size_t>(config.trials));

  const auto run_trial = [&](long trial) {
    const std::uint64_t seed = trial_seed(config.seed, trial);
    const QuadraticProblem problem =
        pinned ? *pinned : sample(config.agents, config.dimension, seed);
    for (size_t v = 0; v < config.variants.size(); ++v) {
      AlgorithmInstance instance = build(config.variants[v].form, graph, config.dimension);
      ErrorTrace trace = run(instance, problem, config.iterations, config.events);
      trace.scenario = config.scenario;
      trace.variant = config.variants[v].name;
      trace.trial = trial;
      trace.seed = seed;
      result.traces[v][static_cast<size_t>(trial)] = std::move(trace);
    }
  };

  int pool = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min<long>(pool, config.trials));
  if (pool == 1) {
    for (long t = 0; t < config.trials; ++t) run_trial(t);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(pool));
    for (int w = 0; w < pool; ++w) {
      workers.emplace_back([&] {
        for (long t = next.fetch_add(1); t < config.trials; t = next.fetch_add(1)) run_trial(t);
      });
    }
    for (auto& w : workers) w.join();
  }

  for (size_t v = 0; v < config.variants.size(); ++v) {
    AggregateTrace agg;
    agg.variant = config.variants[v].name;
    agg.records.resize(static_cast<size_t>(config.iterations));
    for (long k = 0; k < config.iterations; ++k) {
      auto& rec = agg.records[static_cast<size_t>(k)];
      rec.iteration = k;
      for (long t = 0; t < config.trials; ++t) {
        const auto& src = result.traces[v][static_cast<size_t>(t)].records[static_cast<size_t>(k)];
        rec.e_opt += src.e_opt;
        rec.e_con += src.e_con;
        rec.e_total += src.e_total;
      }
      const auto trials = static_cast<double>(config.trials);
      rec.e_opt /= trials;
      rec.e_con /= trials;
      rec.e_total /= trials;
    }
    result.aggregates.push_back(std::move(agg));
  }
  return result;
}

}  // namespace distopt
