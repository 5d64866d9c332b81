#include "distboost/tune.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "distboost/parallel.hpp"

namespace distboost {

namespace {

// Replays a fitted selection log on held-out rows, one iteration at a time.
class PathReplay {
 public:
  PathReplay(const FitState& state, const Dataset& oob)
      : state_(state), oob_(oob), etas_(state.family.n_params(), std::vector<double>(oob.n())) {
    for (int k = 0; k < state.family.n_params(); ++k) {
      std::fill(etas_[k].begin(), etas_[k].end(), state.offsets[k]);
    }
  }

  // Applies every logged update belonging to iteration `m`.
  void advance_to(int m) {
    const auto& log = state_.selection_log;
    while (next_ < log.size() && log[next_].iteration <= m) {
      const auto& e = log[next_++];
      const auto x = oob_.column(e.covariate);
      auto& eta = etas_[e.param];
      const double a = state_.step_length * e.intercept;
      const double b = state_.step_length * e.slope;
      for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += a + b * x[i];
    }
  }

  double mean_risk() const {
    return nll(state_.family, oob_.y(), etas_) / static_cast<double>(oob_.n());
  }

 private:
  const FitState& state_;
  const Dataset& oob_;
  Predictors etas_;
  std::size_t next_ = 0;
};

struct FoldOutcome {
  bool used = false;
  std::vector<double> risk;
  std::uint64_t path_fits = 0;
  std::uint64_t grid_evaluations = 0;
  std::string warning;
};

FoldOutcome evaluate_noncyclical(BoostConfig config, const Dataset& in, const Dataset& oob,
                                 const MstopGrid& grid) {
  FoldOutcome out;
  out.risk.assign(grid.points.size(), 0.0);
  std::map<int, std::vector<std::size_t>> by_value;
  int max_m = 0;
  for (std::size_t g = 0; g < grid.points.size(); ++g) {
    by_value[grid.points[g][0]].push_back(g);
    max_m = std::max(max_m, grid.points[g][0]);
  }
  config.mstop = {max_m};
  const auto state = fit_noncyclical(config, in);
  ++out.path_fits;
  PathReplay replay(state, oob);
  for (const auto& [m, indices] : by_value) {
    replay.advance_to(m);
    const double r = replay.mean_risk();
    for (auto g : indices) out.risk[g] = r;
    out.grid_evaluations += indices.size();
  }
  return out;
}

FoldOutcome evaluate_cyclical(BoostConfig config, const Dataset& in, const Dataset& oob,
                              const MstopGrid& grid) {
  FoldOutcome out;
  out.risk.assign(grid.points.size(), 0.0);
  std::map<std::vector<int>, std::size_t> index_of;
  for (std::size_t g = 0; g < grid.points.size(); ++g) index_of.emplace(grid.points[g], g);

  std::vector<std::size_t> order(grid.points.size());
  std::iota(order.begin(), order.end(), 0);
  auto max_of = [](const std::vector<int>& t) { return *std::max_element(t.begin(), t.end()); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int ma = max_of(grid.points[a]);
    const int mb = max_of(grid.points[b]);
    if (ma != mb) return ma > mb;
    return grid.points[a] > grid.points[b];
  });

  std::vector<bool> covered(grid.points.size(), false);
  for (std::size_t g : order) {
    if (covered[g]) continue;
    const auto& target = grid.points[g];
    config.mstop = target;
    const auto state = fit_cyclical(config, in);
    ++out.path_fits;
    // The state after iteration m of a fit to `target` equals a fit to min(target, m).
    PathReplay replay(state, oob);
    const int top = max_of(target);
    std::vector<int> snapshot(target.size());
    for (int m = 0; m <= top; ++m) {
      replay.advance_to(m);
      for (std::size_t k = 0; k < target.size(); ++k) snapshot[k] = std::min(target[k], m);
      const auto it = index_of.find(snapshot);
      if (it == index_of.end() || covered[it->second]) continue;
      out.risk[it->second] = replay.mean_risk();
      covered[it->second] = true;
      ++out.grid_evaluations;
    }
  }
  return out;
}

}  // namespace

std::vector<Fold> make_folds(const ResamplingPlan& plan, std::size_t n) {
  if (plan.folds < 2) throw std::invalid_argument("need at least two folds");
  if (n < 4) throw std::invalid_argument("resampling needs at least four observations");
  std::mt19937_64 rng(plan.seed);
  std::vector<Fold> folds(plan.folds);
  for (auto& fold : folds) {
    std::vector<char> drawn(n, 0);
    if (plan.kind == ResamplingKind::SubsampleHalf) {
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      fold.in_bag.assign(perm.begin(), perm.begin() + n / 2);
      std::sort(fold.in_bag.begin(), fold.in_bag.end());
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      fold.in_bag.resize(n);
      for (auto& i : fold.in_bag) i = pick(rng);
      std::sort(fold.in_bag.begin(), fold.in_bag.end());
    }
    for (auto i : fold.in_bag) drawn[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!drawn[i]) fold.out_of_bag.push_back(i);
    }
  }
  return folds;
}

std::vector<int> grid_axis(int max_per_param, int length) {
  if (length < 2) throw std::invalid_argument("grid length must be at least 2");
  if (max_per_param < 1) throw std::invalid_argument("grid maximum must be at least 1");
  std::vector<int> axis;
  const double log_max = std::log(static_cast<double>(max_per_param));
  for (int i = 0; i < length; ++i) {
    const double v = std::exp(log_max * i / (length - 1));
    axis.push_back(std::clamp(static_cast<int>(std::lround(v)), 1, max_per_param));
  }
  axis.front() = 1;
  axis.back() = max_per_param;
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

MstopGrid make_grid(int max_per_param, int length, int n_params) {
  if (n_params < 1) throw std::invalid_argument("grid needs at least one parameter");
  const auto axis = grid_axis(max_per_param, length);
  MstopGrid grid{{}, max_per_param, length};
  std::vector<std::size_t> idx(n_params, 0);
  while (true) {
    std::vector<int> point(n_params);
    for (int k = 0; k < n_params; ++k) point[k] = axis[idx[k]];
    grid.points.push_back(std::move(point));
    int k = n_params - 1;
    while (k >= 0 && ++idx[k] == axis.size()) idx[k--] = 0;
    if (k < 0) break;
  }
  return grid;
}

MstopGrid path_grid(int max_iterations) {
  if (max_iterations < 0) throw std::invalid_argument("path length must be non-negative");
  MstopGrid grid{{}, max_iterations, max_iterations + 1};
  for (int m = 0; m <= max_iterations; ++m) grid.points.push_back({m});
  return grid;
}

CvResult cv_risk(const BoostConfig& config, const Dataset& data, const ResamplingPlan& plan,
                 const MstopGrid& grid, int threads) {
  if (grid.points.empty()) throw std::invalid_argument("empty mstop grid");
  const std::size_t dims = config.method == Method::Cyclical ? config.family.n_params() : 1;
  for (const auto& point : grid.points) {
    if (point.size() != dims) {
      throw std::invalid_argument(fmt::format("{} tuning needs {}-dimensional grid points, got {}",
                                              method_name(config.method), dims, point.size()));
    }
    if (std::any_of(point.begin(), point.end(), [](int m) { return m < 0; })) {
      throw std::invalid_argument("grid points must be non-negative");
    }
  }

  const auto folds = make_folds(plan, data.n());
  std::vector<FoldOutcome> outcomes(folds.size());
  parallel_for(folds.size(), threads, [&](std::size_t f) {
    const Dataset in = data.subset(folds[f].in_bag);
    if (folds[f].out_of_bag.empty() || is_degenerate_response(config.family, in.y())) {
      outcomes[f].warning = fmt::format("fold {} dropped: degenerate in-bag response", f);
      return;
    }
    const Dataset oob = data.subset(folds[f].out_of_bag);
    outcomes[f] = config.method == Method::Cyclical ? evaluate_cyclical(config, in, oob, grid)
                                                    : evaluate_noncyclical(config, in, oob, grid);
    outcomes[f].used = true;
  });

  CvResult result;
  result.grid = grid;
  result.mean_risk.assign(grid.points.size(), 0.0);
  for (auto& o : outcomes) {
    if (!o.warning.empty()) result.warnings.push_back(o.warning);
    if (!o.used) continue;
    ++result.folds_used;
    result.path_fits += o.path_fits;
    result.grid_evaluations += o.grid_evaluations;
    for (std::size_t g = 0; g < o.risk.size(); ++g) result.mean_risk[g] += o.risk[g];
    result.fold_risk.push_back(std::move(o.risk));
  }
  if (result.folds_used == 0) throw std::runtime_error("every fold had a degenerate response");
  for (double& r : result.mean_risk) r /= result.folds_used;
  result.best_index = static_cast<std::size_t>(
      std::min_element(result.mean_risk.begin(), result.mean_risk.end()) - result.mean_risk.begin());
  result.best_point = grid.points[result.best_index];
  return result;
}

}  // namespace distboost
