#include "distboost/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace distboost {

namespace {

std::atomic<std::uint64_t> g_fit_invocations{0};

struct Candidate {
  int param = -1;
  std::size_t learner = 0;
  FittedBaseLearner fitted;
  double risk = std::numeric_limits<double>::infinity();
  std::vector<double> eta;
};

// Shared machinery of both loops: prepared learners, current state, update bookkeeping.
class Booster {
 public:
  Booster(const BoostConfig& config, const Dataset& data) : config_(config), data_(data) {
    config.validate(data);
    check_response(config.family, data.y());
    g_fit_invocations.fetch_add(1, std::memory_order_relaxed);

    const int k = config.family.n_params();
    prepared_.resize(k);
    for (int param = 0; param < k; ++param) {
      for (const auto& spec : config.learners[param]) {
        prepared_[param].emplace_back(spec, data.column(spec.covariate));
      }
    }
    state_.family = config.family;
    state_.step_length = config.step_length;
    state_.p = data.p();
    state_.offsets = offsets(config.family, data.y());
    state_.etas.assign(k, std::vector<double>(data.n()));
    for (int param = 0; param < k; ++param) {
      std::fill(state_.etas[param].begin(), state_.etas[param].end(), state_.offsets[param]);
    }
    current_risk_ = nll(config.family, data.y(), state_.etas);
    state_.risk_trace.push_back(current_risk_);
  }

  // Best learner for `param` by residual sum of squares against the negative gradient.
  Candidate best_by_rss(int param) const {
    const auto u = negative_gradient(config_.family, data_.y(), state_.etas, param);
    const auto summary = TargetSummary::of(u);
    Candidate best;
    double best_rss = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prepared_[param].size(); ++j) {
      const auto& learner = prepared_[param][j];
      auto fitted = learner.fit(data_.column(learner.spec().covariate), u, summary);
      if (fitted.rss < best_rss) {
        best_rss = fitted.rss;
        best.param = param;
        best.learner = j;
        best.fitted = fitted;
      }
    }
    return best;
  }

  // Best learner for `param` by post-update negative log-likelihood.
  Candidate best_by_outer_loss(int param) const {
    const auto u = negative_gradient(config_.family, data_.y(), state_.etas, param);
    const auto summary = TargetSummary::of(u);
    Candidate best;
    std::vector<double> eta;
    for (std::size_t j = 0; j < prepared_[param].size(); ++j) {
      const auto& learner = prepared_[param][j];
      auto fitted = learner.fit(data_.column(learner.spec().covariate), u, summary);
      step(param, fitted, eta);
      const double r = nll_with(config_.family, data_.y(), state_.etas, param, eta);
      if (r < best.risk) {
        best.param = param;
        best.learner = j;
        best.fitted = fitted;
        best.risk = r;
        best.eta = eta;
      }
    }
    return best;
  }

  void evaluate(Candidate& c) const {
    step(c.param, c.fitted, c.eta);
    c.risk = nll_with(config_.family, data_.y(), state_.etas, c.param, c.eta);
  }

  void apply(Candidate&& c, int iteration) {
    if (!std::isfinite(c.risk)) {
      throw std::runtime_error(fmt::format("non-finite risk after update at iteration {} on parameter {}",
                                           iteration, config_.family.param_names[c.param]));
    }
    const double nu = config_.step_length;
    const std::size_t cov = c.fitted.spec.covariate;
    auto& coef = state_.coefficients[{c.param, cov}];
    coef.intercept += nu * c.fitted.intercept;
    coef.slope += nu * c.fitted.slope;
    state_.etas[c.param] = std::move(c.eta);
    state_.selection_log.push_back(
        {iteration, c.param, c.learner, cov, c.fitted.intercept, c.fitted.slope, c.risk});
    current_risk_ = c.risk;
  }

  bool notify(const UpdateObserver& observer) const { return !observer || observer(state_); }

  void close_iteration(int iteration) {
    state_.iterations = iteration;
    state_.risk_trace.push_back(current_risk_);
  }

  FitState take() { return std::move(state_); }
  const BoostConfig& config() const { return config_; }

 private:
  void step(int param, const FittedBaseLearner& fitted, std::vector<double>& eta) const {
    const auto x = data_.column(fitted.spec.covariate);
    const auto& cur = state_.etas[param];
    const double nu = config_.step_length;
    eta.resize(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      eta[i] = cur[i] + nu * (fitted.intercept + fitted.slope * x[i]);
    }
  }

  const BoostConfig& config_;
  const Dataset& data_;
  std::vector<std::vector<PreparedLearner>> prepared_;
  FitState state_;
  double current_risk_ = 0.0;
};

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Cyclical: return "cyclical";
    case Method::NoncycInner: return "inner";
    case Method::NoncycOuter: return "outer";
  }
  return "?";
}

Method method_from_name(std::string_view name) {
  if (name == "cyclical") return Method::Cyclical;
  if (name == "inner") return Method::NoncycInner;
  if (name == "outer") return Method::NoncycOuter;
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

void BoostConfig::validate(const Dataset& data) const {
  if (!(step_length > 0.0 && step_length < 1.0)) {
    throw std::invalid_argument(fmt::format("step length {} outside (0, 1)", step_length));
  }
  const int k = family.n_params();
  const std::size_t expected_mstop = method == Method::Cyclical ? static_cast<std::size_t>(k) : 1;
  if (mstop.size() != expected_mstop) {
    throw std::invalid_argument(fmt::format("{} fitting needs {} mstop value(s), got {}",
                                            method_name(method), expected_mstop, mstop.size()));
  }
  if (std::any_of(mstop.begin(), mstop.end(), [](int m) { return m < 0; })) {
    throw std::invalid_argument("mstop values must be non-negative");
  }
  if (static_cast<int>(learners.size()) != k) {
    throw std::invalid_argument(
        fmt::format("need learner sets for {} parameters, got {}", k, learners.size()));
  }
  for (int param = 0; param < k; ++param) {
    if (learners[param].empty()) {
      throw std::invalid_argument(
          fmt::format("no base-learners for parameter {}", family.param_names[param]));
    }
    for (const auto& spec : learners[param]) distboost::validate(spec, data);
  }
}

std::vector<std::vector<BaseLearnerSpec>> linear_learners(int n_params, std::size_t p) {
  std::vector<std::vector<BaseLearnerSpec>> out(n_params);
  for (auto& set : out) {
    for (std::size_t j = 0; j < p; ++j) set.push_back(BaseLearnerSpec::linear(j));
  }
  return out;
}

std::vector<double> FitState::update_risk_trace() const {
  std::vector<double> out;
  out.reserve(selection_log.size() + 1);
  out.push_back(risk_trace.front());
  for (const auto& e : selection_log) out.push_back(e.risk_after);
  return out;
}

std::vector<ParamCovariate> FitState::selection_order() const {
  std::vector<ParamCovariate> order;
  std::set<ParamCovariate> seen;
  for (const auto& e : selection_log) {
    if (seen.insert({e.param, e.covariate}).second) order.emplace_back(e.param, e.covariate);
  }
  return order;
}

FitState fit_cyclical(const BoostConfig& config, const Dataset& data, const UpdateObserver& observer) {
  if (config.method != Method::Cyclical) {
    throw std::invalid_argument("fit_cyclical called with a noncyclical method");
  }
  Booster booster(config, data);
  const int k = config.family.n_params();
  const int max_iter = *std::max_element(config.mstop.begin(), config.mstop.end());
  for (int m = 1; m <= max_iter; ++m) {
    for (int param = 0; param < k; ++param) {
      if (m > config.mstop[param]) continue;
      // Gradients see the updates already made to earlier parameters in this iteration.
      auto best = booster.best_by_rss(param);
      booster.evaluate(best);
      booster.apply(std::move(best), m);
      if (!booster.notify(observer)) {
        booster.close_iteration(m);
        return booster.take();
      }
    }
    booster.close_iteration(m);
  }
  return booster.take();
}

FitState fit_noncyclical(const BoostConfig& config, const Dataset& data,
                         const UpdateObserver& observer) {
  if (config.method == Method::Cyclical) {
    throw std::invalid_argument("fit_noncyclical called with the cyclical method");
  }
  Booster booster(config, data);
  const int k = config.family.n_params();
  for (int m = 1; m <= config.mstop[0]; ++m) {
    Candidate best;
    for (int param = 0; param < k; ++param) {
      Candidate champion;
      if (config.method == Method::NoncycOuter) {
        champion = booster.best_by_outer_loss(param);
      } else {
        champion = booster.best_by_rss(param);
        booster.evaluate(champion);
      }
      if (champion.risk < best.risk) best = std::move(champion);
    }
    if (best.param < 0) {
      throw std::runtime_error(fmt::format("non-finite risk for every candidate at iteration {}", m));
    }
    booster.apply(std::move(best), m);
    booster.close_iteration(m);
    if (!booster.notify(observer)) break;
  }
  return booster.take();
}

FitState fit(const BoostConfig& config, const Dataset& data, const UpdateObserver& observer) {
  return config.method == Method::Cyclical ? fit_cyclical(config, data, observer)
                                           : fit_noncyclical(config, data, observer);
}

std::uint64_t fit_invocations() { return g_fit_invocations.load(std::memory_order_relaxed); }

double risk(const FitState& state) {
  if (state.risk_trace.empty()) throw std::invalid_argument("state has no risk trace");
  return state.risk_trace.back();
}

Predictors predict_etas(const FitState& state, const Dataset& newdata) {
  if (newdata.p() != state.p) {
    throw std::invalid_argument(
        fmt::format("model was fitted on {} covariates, new data has {}", state.p, newdata.p()));
  }
  const int k = state.family.n_params();
  Predictors etas(k, std::vector<double>(newdata.n()));
  for (int param = 0; param < k; ++param) {
    std::fill(etas[param].begin(), etas[param].end(), state.offsets[param]);
  }
  for (const auto& [key, coef] : state.coefficients) {
    const auto x = newdata.column(key.second);
    auto& eta = etas[key.first];
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += coef.intercept + coef.slope * x[i];
  }
  return etas;
}

std::vector<std::vector<double>> predict_params(const FitState& state, const Dataset& newdata) {
  auto etas = predict_etas(state, newdata);
  for (int param = 0; param < state.family.n_params(); ++param) {
    for (double& v : etas[param]) v = inverse_link(state.family.links[param], v);
  }
  return etas;
}

}  // namespace distboost
