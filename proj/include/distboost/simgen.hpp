#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "distboost/engine.hpp"
#include "distboost/stabsel.hpp"
#include "distboost/table.hpp"
#include "distboost/tune.hpp"

namespace distboost {

enum class ScenarioId { S1A, S1B, S2A, S2B, S3A, S3B, Conv };

std::string_view scenario_name(ScenarioId id);
ScenarioId scenario_from_name(std::string_view name);

struct Scenario {
  ScenarioId id = ScenarioId::Conv;
  DistributionFamily family = normal_family();
  /// Link used to map each parameter's linear predictor to the parameter when simulating.
  std::vector<Link> generating_links;
  std::vector<double> intercepts;
  /// coefficients[k]: covariate index (0-based) -> coefficient on parameter k.
  std::vector<std::map<std::size_t, double>> coefficients;
  std::size_t n = 500;
  std::size_t p_total = 6;
  std::uint64_t seed = 1;

  PairSet support() const;
};

/// Scenario with the default coefficients. Conv and S1A carry the convergence design's
/// coefficients; the others use alternating magnitudes 0.5 and 0.3.
Scenario make_scenario(ScenarioId id, std::size_t n, std::size_t p_total, std::uint64_t seed);

struct SimulatedData {
  Dataset data;
  PairSet truth;
};

SimulatedData generate(const Scenario& scenario);

// --- experiments -----------------------------------------------------------------------------

struct ConvergenceSettings {
  int replications = 20;
  std::size_t n = 500;
  int total_iterations = 1500;
  double step_length = 0.1;
  std::vector<Method> methods{Method::Cyclical, Method::NoncycInner, Method::NoncycOuter};
  std::uint64_t seed = 1;
  int threads = 1;
};

struct CoefficientEstimate {
  int replication;
  Method method;
  int param;
  std::size_t covariate;
  double estimate;
  double truth;
};

std::vector<CoefficientEstimate> run_convergence(const ConvergenceSettings& s);
Table to_table(const std::vector<CoefficientEstimate>& rows, const DistributionFamily& family);

struct SpeedSettings {
  int replications = 20;
  std::size_t n = 500;
  std::size_t p_noise = 0;
  int total_iterations = 1500;
  double step_length = 0.1;
  std::vector<Method> methods{Method::Cyclical, Method::NoncycInner, Method::NoncycOuter};
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SpeedResult {
  std::vector<Method> methods;
  /// mean_risk[method][t]: training risk after t total base-learner updates, averaged over
  /// replications (t = 0 is the offset risk).
  std::vector<std::vector<double>> mean_risk;
  std::size_t p_noise = 0;
};

SpeedResult run_speed(const SpeedSettings& s);
Table to_table(const SpeedResult& r);

struct RuntimeSettings {
  int replications = 1;
  std::size_t n = 500;
  int folds = 25;
  ResamplingKind resampling = ResamplingKind::Bootstrap;
  int grid_length = 10;
  int grid_max = 300;
  double step_length = 0.1;
  std::vector<int> dimensions{2, 3};
  std::vector<Method> methods{Method::Cyclical, Method::NoncycInner, Method::NoncycOuter};
  std::uint64_t seed = 1;
  int threads = 1;
};

struct RuntimeRow {
  int replication;
  int dimensions;
  Method method;
  std::vector<int> best_mstop;
  int best_total;
  double oob_risk;
  std::uint64_t path_fits;
  std::uint64_t grid_evaluations;
  int folds_used;
  double seconds;
};

std::vector<RuntimeRow> run_runtime(const RuntimeSettings& s);
Table to_table(const std::vector<RuntimeRow>& rows);

struct SweepSettings {
  std::vector<ScenarioId> scenarios{ScenarioId::S1A};
  std::vector<Method> methods{Method::Cyclical, Method::NoncycInner};
  std::vector<std::size_t> ps{50, 250, 500};
  std::vector<int> qs{8, 15, 25, 50};
  /// Thresholds 0.55, 0.56, ..., 0.99 by default.
  std::vector<double> thresholds;
  int replications = 5;
  int subsamples = 50;
  int mstop_cap = 1000;
  std::size_t n = 500;
  double step_length = 0.1;
  std::uint64_t seed = 1;
  int threads = 1;
};

std::vector<double> default_thresholds();

struct SweepRow {
  ScenarioId scenario;
  Method method;
  std::size_t p;
  int replication;
  int q;
  double pi_thr;
  int tp;
  int fp;
  double pfer_bound;
};

std::vector<SweepRow> run_stabsweep(const SweepSettings& s);
Table to_table(const std::vector<SweepRow>& rows);

using ExperimentSettings =
    std::variant<ConvergenceSettings, SpeedSettings, RuntimeSettings, SweepSettings>;

/// Runs the experiment selected by the settings type and returns its long-format table.
Table run_experiment(const ExperimentSettings& settings);

}  // namespace distboost
