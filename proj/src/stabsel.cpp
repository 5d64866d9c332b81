#include "distboost/stabsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "distboost/parallel.hpp"

namespace distboost {

namespace {

void check_pi(double pi_thr) {
  if (!(pi_thr > 0.5 && pi_thr <= 1.0)) {
    throw InfeasibleConfiguration(fmt::format("pi_thr = {} must lie in (0.5, 1]", pi_thr));
  }
}

void check_q(int q, int effective_p) {
  if (q < 1) throw InfeasibleConfiguration(fmt::format("q = {} must be at least 1", q));
  if (q > effective_p) {
    throw InfeasibleConfiguration(
        fmt::format("q = {} exceeds the number of candidate base-learners {}", q, effective_p));
  }
}

std::vector<std::size_t> draw_half(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(n / 2);
  std::sort(perm.begin(), perm.end());
  return perm;
}

struct SubsamplePath {
  std::vector<ParamCovariate> order;  // distinct pairs in order of entry
};

SubsamplePath fit_subsample(const BoostConfig& boost, const Dataset& data, std::size_t target_q,
                            std::uint64_t seed, std::size_t b) {
  auto rows = draw_half(data.n(), derive_seed(seed, b, 0));
  Dataset sub = data.subset(rows);
  if (is_degenerate_response(boost.family, sub.y())) {
    rows = draw_half(data.n(), derive_seed(seed, b, 1));
    sub = data.subset(rows);
    if (is_degenerate_response(boost.family, sub.y())) {
      throw std::runtime_error(
          fmt::format("subsample {} has a degenerate response after one redraw", b));
    }
  }
  SubsamplePath path;
  PairSet seen;
  std::size_t consumed = 0;
  auto observer = [&](const FitState& state) {
    for (; consumed < state.selection_log.size(); ++consumed) {
      const auto& e = state.selection_log[consumed];
      if (seen.insert({e.param, e.covariate}).second) path.order.emplace_back(e.param, e.covariate);
    }
    return path.order.size() < target_q;
  };
  fit(boost, sub, observer);
  return path;
}

}  // namespace

double pfer_bound(int q, double pi_thr, int effective_p) {
  check_pi(pi_thr);
  if (effective_p < 1) throw std::invalid_argument("effective p must be positive");
  const double qd = q;
  return qd * qd / ((2.0 * pi_thr - 1.0) * effective_p);
}

StabSelConfig resolve_triple(std::optional<int> q, std::optional<double> pi_thr,
                             std::optional<double> pfer, int effective_p) {
  const int supplied = int{q.has_value()} + int{pi_thr.has_value()} + int{pfer.has_value()};
  if (supplied != 2) {
    throw std::invalid_argument(
        fmt::format("exactly two of q, pi_thr and PFER must be given ({} supplied)", supplied));
  }
  if (effective_p < 1) throw std::invalid_argument("effective p must be positive");
  if (pfer && !(*pfer > 0.0 && std::isfinite(*pfer))) {
    throw InfeasibleConfiguration(fmt::format("PFER = {} must be positive", *pfer));
  }
  StabSelConfig cfg;
  cfg.effective_p = effective_p;
  const double p = effective_p;
  if (q && pi_thr) {
    check_q(*q, effective_p);
    check_pi(*pi_thr);
    cfg.given = GivenPair::QAndPi;
    cfg.q = *q;
    cfg.pi_thr = *pi_thr;
    cfg.pfer = pfer_bound(*q, *pi_thr, effective_p);
  } else if (q && pfer) {
    check_q(*q, effective_p);
    cfg.given = GivenPair::QAndPfer;
    cfg.q = *q;
    cfg.pfer = *pfer;
    const double qd = *q;
    const double derived = (qd * qd / (*pfer * p) + 1.0) / 2.0;
    if (derived > 1.0) {
      throw InfeasibleConfiguration(fmt::format(
          "q = {} with PFER = {} needs pi_thr = {:.4f} > 1; lower q or raise PFER", *q, *pfer, derived));
    }
    cfg.pi_thr = derived;
  } else {
    check_pi(*pi_thr);
    cfg.given = GivenPair::PiAndPfer;
    cfg.pi_thr = *pi_thr;
    cfg.pfer = *pfer;
    const double derived = std::floor(std::sqrt(*pfer * (2.0 * *pi_thr - 1.0) * p) + 1e-9);
    if (derived < 1.0) {
      throw InfeasibleConfiguration(fmt::format(
          "pi_thr = {} with PFER = {} allows q < 1; raise PFER or lower pi_thr", *pi_thr, *pfer));
    }
    cfg.q = static_cast<int>(std::min(derived, p));
  }
  return cfg;
}

PairSet stable_set(const std::map<ParamCovariate, double>& frequencies, double pi_thr) {
  PairSet out;
  for (const auto& [pair, freq] : frequencies) {
    if (freq >= pi_thr) out.insert(pair);
  }
  return out;
}

int effective_p(const BoostConfig& boost) {
  int total = 0;
  for (const auto& set : boost.learners) total += static_cast<int>(set.size());
  return total;
}

std::vector<StabSelResult> run_stabsel_multi(const StabSelConfig& config, const std::vector<int>& qs,
                                             const BoostConfig& boost, const Dataset& data,
                                             int threads) {
  if (qs.empty()) throw std::invalid_argument("no q values given");
  if (config.subsamples < 2) throw std::invalid_argument("stability selection needs B >= 2");
  if (config.mstop_cap < 1) throw std::invalid_argument("mstop cap must be positive");
  check_pi(config.pi_thr);
  const int p_eff = effective_p(boost);
  for (int q : qs) check_q(q, p_eff);
  const int q_max = *std::max_element(qs.begin(), qs.end());

  BoostConfig capped = boost;
  capped.mstop.assign(boost.method == Method::Cyclical ? boost.family.n_params() : 1,
                      config.mstop_cap);
  capped.validate(data);

  std::vector<SubsamplePath> paths(config.subsamples);
  parallel_for(paths.size(), threads, [&](std::size_t b) {
    paths[b] = fit_subsample(capped, data, static_cast<std::size_t>(q_max), config.seed, b);
  });

  std::vector<StabSelResult> results;
  for (int q : qs) {
    StabSelResult r;
    r.effective_p = p_eff;
    r.pi_thr = config.pi_thr;
    r.pfer_bound = pfer_bound(q, config.pi_thr, p_eff);
    for (int k = 0; k < boost.family.n_params(); ++k) {
      for (const auto& spec : boost.learners[k]) r.frequencies[{k, spec.covariate}] = 0.0;
    }
    for (std::size_t b = 0; b < paths.size(); ++b) {
      const auto& order = paths[b].order;
      const std::size_t take = std::min(order.size(), static_cast<std::size_t>(q));
      if (take < static_cast<std::size_t>(q)) {
        r.warnings.push_back(fmt::format(
            "subsample {} reached mstop cap {} with {} < q = {} distinct base-learners", b,
            config.mstop_cap, take, q));
      }
      PairSet selected(order.begin(), order.begin() + take);
      for (const auto& pair : selected) r.frequencies[pair] += 1.0;
      r.per_subsample_sets.push_back(std::move(selected));
    }
    for (auto& [pair, freq] : r.frequencies) freq /= static_cast<double>(config.subsamples);
    r.stable_set = stable_set(r.frequencies, config.pi_thr);
    results.push_back(std::move(r));
  }
  return results;
}

StabSelResult run_stabsel(const StabSelConfig& config, const BoostConfig& boost, const Dataset& data,
                          int threads) {
  return std::move(run_stabsel_multi(config, {config.q}, boost, data, threads).front());
}

TpFp tp_fp(const PairSet& stable, const PairSet& truth) {
  TpFp out;
  for (const auto& pair : stable) {
    if (truth.count(pair)) {
      ++out.tp;
    } else {
      ++out.fp;
    }
  }
  return out;
}

}  // namespace distboost
