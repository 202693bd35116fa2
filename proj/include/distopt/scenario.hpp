#pragma once

#include "distopt/engine.hpp"
#include "distopt/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace distopt {

struct VariantConfig {
  std::string name;
  AlgorithmForm form;
};

/// Declarative description of a scenario run: which algorithm variants, on
/// which graph and problem sizes, for how many seeded trials.
struct ScenarioConfig {
  std::string scenario = "custom";
  long trials = 100;
  long iterations = 1000;
  std::uint64_t seed = 1;
  int agents = 5;
  int dimension = 3;
  std::string graph_source = "fig2";  // "fig2" or file:<path>
  std::optional<std::string> problem_file;
  std::vector<VariantConfig> variants;
  std::vector<NetworkEvent> events;
};

/// Paper-parameter presets for the four experiment scenarios.
/// Throws std::invalid_argument for unknown names.
ScenarioConfig scenario_preset(const std::string& name);

/// Applies `key = value` lines (plus [variant NAME] / [event] sections) on
/// top of a base config. Fig presets accept only trials / iterations / seed
/// overrides; custom configs may define everything. Unknown or forbidden
/// keys raise std::invalid_argument naming the field.
ScenarioConfig apply_config(ScenarioConfig base, std::istream& in);

/// Estimator / optimizer expression parsers used by the config format,
/// e.g. "series(p, accel(0.1, 1.1))" or "gradient(0.25)".
EstimatorSpec parse_estimator(const std::string& text);
OptimizerSpec parse_optimizer(const std::string& text);

/// Resolves the configured graph (fig2 or a Laplacian file).
LaplacianGraph scenario_graph(const ScenarioConfig& config);

/// One variant's mean error series over all trials (arithmetic mean of each
/// error series at every iteration).
struct AggregateTrace {
  std::string variant;
  std::vector<TraceRecord> records;
};

struct ScenarioResult {
  ScenarioConfig config;
  // traces[v][t]: variant v, trial t.
  std::vector<std::vector<ErrorTrace>> traces;
  std::vector<AggregateTrace> aggregates;
};

/// Deterministic sub-seed for a trial; pure function of (seed, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, long trial);

/// Runs every trial through every variant. Trials execute in a thread pool;
/// output ordering is independent of scheduling. threads <= 0 picks the
/// hardware concurrency.
ScenarioResult run_scenario(const ScenarioConfig& config, int threads = 0);

/// CSV with header scenario,variant,trial,iteration,e_opt,e_con,e_total and
/// 17-significant-digit decimals; per-variant rows ordered by trial then
/// iteration, aggregate rows (trial id "mean") last.
void emit_csv(const ScenarioResult& result, std::ostream& out);
void emit_csv_file(const ScenarioResult& result, const std::string& path);

/// Static SVG: one panel per variant, log-scale total error vs iteration,
/// thin per-trial curves and a thick mean curve. Deterministic bytes for
/// identical input. Values are clamped at 1e-18 for the log display.
void emit_plot(const ScenarioResult& result, std::ostream& out);
void emit_plot_file(const ScenarioResult& result, const std::string& path);

}  // namespace distopt
