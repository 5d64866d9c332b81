#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "distboost/baselearner.hpp"
#include "distboost/dist.hpp"

namespace distboost {

enum class Method { Cyclical, NoncycInner, NoncycOuter };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct BoostConfig {
  Method method = Method::NoncycInner;
  double step_length = 0.1;
  /// One entry for the noncyclical methods, one per distribution parameter for cyclical.
  std::vector<int> mstop;
  DistributionFamily family = normal_family();
  /// learners[k] are the candidates for parameter k.
  std::vector<std::vector<BaseLearnerSpec>> learners;

  void validate(const Dataset& data) const;
};

/// One linear learner per covariate for every distribution parameter.
std::vector<std::vector<BaseLearnerSpec>> linear_learners(int n_params, std::size_t p);

/// (parameter, covariate), 0-based.
using ParamCovariate = std::pair<int, std::size_t>;

struct SelectionEntry {
  int iteration = 0;
  int param = 0;
  std::size_t learner = 0;
  std::size_t covariate = 0;
  /// Unscaled fitted coefficients; the model moves by step_length times these.
  double intercept = 0.0;
  double slope = 0.0;
  double risk_after = 0.0;
};

/// Accumulated step_length-scaled contribution of all updates on one (parameter, covariate).
struct Coefficient {
  double intercept = 0.0;
  double slope = 0.0;
};

struct FitState {
  DistributionFamily family;
  double step_length = 0.1;
  std::size_t p = 0;
  std::vector<double> offsets;
  Predictors etas;
  std::map<ParamCovariate, Coefficient> coefficients;
  std::vector<SelectionEntry> selection_log;
  /// Entry 0 is the offset risk; one entry per (possibly partial) iteration after that.
  std::vector<double> risk_trace;
  int iterations = 0;

  /// Risk after every individual base-learner update, starting with the offset risk.
  std::vector<double> update_risk_trace() const;
  /// Distinct (parameter, covariate) pairs in order of first selection.
  std::vector<ParamCovariate> selection_order() const;
};

/// Called after every base-learner update; returning false stops the fit.
using UpdateObserver = std::function<bool(const FitState&)>;

FitState fit_cyclical(const BoostConfig& config, const Dataset& data,
                      const UpdateObserver& observer = {});
FitState fit_noncyclical(const BoostConfig& config, const Dataset& data,
                         const UpdateObserver& observer = {});
/// Dispatches on config.method.
FitState fit(const BoostConfig& config, const Dataset& data, const UpdateObserver& observer = {});

/// Total number of boosting-loop executions in this process.
std::uint64_t fit_invocations();

double risk(const FitState& state);

/// Additive predictors on new data from the offsets and accumulated coefficients.
Predictors predict_etas(const FitState& state, const Dataset& newdata);
/// Inverse-link-transformed parameter values per observation.
std::vector<std::vector<double>> predict_params(const FitState& state, const Dataset& newdata);

}  // namespace distboost
