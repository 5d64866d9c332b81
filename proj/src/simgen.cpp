#include "distboost/simgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "distboost/parallel.hpp"

namespace distboost {

namespace {

using Coefs = std::map<std::size_t, double>;

// Alternating magnitudes 0.5, 0.3, ...; the first half positive, the rest negative.
Coefs default_effects(std::initializer_list<std::size_t> covariates) {
  Coefs out;
  const std::size_t count = covariates.size();
  std::size_t i = 0;
  for (auto cov : covariates) {
    const double magnitude = i % 2 == 0 ? 0.5 : 0.3;
    const double sign = i < (count + 1) / 2 ? 1.0 : -1.0;
    out[cov] = sign * magnitude;
    ++i;
  }
  return out;
}

const Coefs kConvMu{{0, 1.0}, {1, 2.0}, {2, 0.5}, {3, -1.0}};
const Coefs kConvSigma{{2, 0.5}, {3, 0.25}, {4, -0.25}, {5, -0.5}};

// Count-family intercepts keep simulated means moderate.
const double kCountMuIntercept = std::log(3.0);
const double kCountSigmaIntercept = std::log(0.5);
const double kZeroInflationIntercept = std::log(0.2 / 0.8);

std::string method_label(Method m) { return std::string(method_name(m)); }

std::vector<int> split_iterations(Method m, int total, int n_params) {
  if (m != Method::Cyclical) return {total};
  return std::vector<int>(n_params, total / n_params);
}

BoostConfig make_config(Method m, const DistributionFamily& family, std::size_t p, double nu,
                        std::vector<int> mstop) {
  BoostConfig cfg;
  cfg.method = m;
  cfg.step_length = nu;
  cfg.family = family;
  cfg.mstop = std::move(mstop);
  cfg.learners = linear_learners(family.n_params(), p);
  return cfg;
}

}  // namespace

std::string_view scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1A: return "1A";
    case ScenarioId::S1B: return "1B";
    case ScenarioId::S2A: return "2A";
    case ScenarioId::S2B: return "2B";
    case ScenarioId::S3A: return "3A";
    case ScenarioId::S3B: return "3B";
    case ScenarioId::Conv: return "conv";
  }
  return "?";
}

ScenarioId scenario_from_name(std::string_view name) {
  for (auto id : {ScenarioId::S1A, ScenarioId::S1B, ScenarioId::S2A, ScenarioId::S2B,
                  ScenarioId::S3A, ScenarioId::S3B, ScenarioId::Conv}) {
    if (name == scenario_name(id)) return id;
  }
  throw std::invalid_argument(fmt::format("unknown scenario '{}'", name));
}

PairSet Scenario::support() const {
  PairSet out;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    for (const auto& [cov, beta] : coefficients[k]) {
      if (beta != 0.0) out.insert({static_cast<int>(k), cov});
    }
  }
  return out;
}

Scenario make_scenario(ScenarioId id, std::size_t n, std::size_t p_total, std::uint64_t seed) {
  if (p_total < 6) throw std::invalid_argument("scenarios need at least the six informative covariates");
  if (n < 2) throw std::invalid_argument("scenarios need at least two observations");
  Scenario s;
  s.id = id;
  s.n = n;
  s.p_total = p_total;
  s.seed = seed;
  switch (id) {
    case ScenarioId::Conv:
    case ScenarioId::S1A:
      s.family = normal_family();
      s.generating_links = {Link::Identity, Link::Log};
      s.intercepts = {0.0, 0.0};
      s.coefficients = {kConvMu, kConvSigma};
      break;
    case ScenarioId::S1B:
      s.family = normal_family();
      s.generating_links = {Link::Log, Link::Log};
      s.intercepts = {0.0, 0.0};
      s.coefficients = {default_effects({0, 1, 2, 3, 4}), default_effects({5})};
      break;
    case ScenarioId::S2A:
      s.family = negbin_family();
      s.generating_links = s.family.links;
      s.intercepts = {kCountMuIntercept, kCountSigmaIntercept};
      s.coefficients = {default_effects({0, 1, 2, 3}), default_effects({2, 3, 4, 5})};
      break;
    case ScenarioId::S2B:
      s.family = negbin_family();
      s.generating_links = s.family.links;
      s.intercepts = {kCountMuIntercept, kCountSigmaIntercept};
      s.coefficients = {default_effects({0, 1, 2, 3, 4}), default_effects({5})};
      break;
    case ScenarioId::S3A:
      s.family = zinb_family();
      s.generating_links = s.family.links;
      s.intercepts = {kCountMuIntercept, kCountSigmaIntercept, kZeroInflationIntercept};
      s.coefficients = {default_effects({0, 1, 2}), default_effects({2, 3, 4}),
                        default_effects({0, 4, 5})};
      break;
    case ScenarioId::S3B:
      s.family = zinb_family();
      s.generating_links = s.family.links;
      s.intercepts = {kCountMuIntercept, kCountSigmaIntercept, kZeroInflationIntercept};
      s.coefficients = {default_effects({0, 1, 2, 3, 4}), default_effects({4, 5}),
                        default_effects({5})};
      break;
  }
  return s;
}

SimulatedData generate(const Scenario& s) {
  const int k = s.family.n_params();
  if (static_cast<int>(s.coefficients.size()) != k || static_cast<int>(s.intercepts.size()) != k ||
      static_cast<int>(s.generating_links.size()) != k) {
    throw std::invalid_argument("scenario shape does not match its family");
  }
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> cols(s.p_total, std::vector<double>(s.n));
  for (auto& col : cols) {
    for (auto& v : col) v = unif(rng);
  }

  std::vector<double> y(s.n);
  std::vector<double> theta(k);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    for (int p = 0; p < k; ++p) {
      double eta = s.intercepts[p];
      for (const auto& [cov, beta] : s.coefficients[p]) eta += beta * cols.at(cov)[i];
      theta[p] = inverse_link(s.generating_links[p], eta);
    }
    switch (s.family.kind) {
      case FamilyKind::Normal:
        y[i] = theta[0] + theta[1] * gauss(rng);
        break;
      case FamilyKind::NegBin:
      case FamilyKind::ZINB: {
        if (s.family.kind == FamilyKind::ZINB && unit(rng) < theta[2]) {
          y[i] = 0.0;
          break;
        }
        // Gamma-Poisson mixture: lambda ~ Gamma(1/sigma, sigma mu) has mean mu, var sigma mu^2.
        const double shape = 1.0 / theta[1];
        std::gamma_distribution<double> gamma(shape, theta[1] * theta[0]);
        const double lambda = gamma(rng);
        if (lambda > 0) {
          std::poisson_distribution<long long> pois(lambda);
          y[i] = static_cast<double>(pois(rng));
        } else {
          y[i] = 0.0;
        }
        break;
      }
    }
  }
  return {Dataset(std::move(cols), std::move(y)), s.support()};
}

// --- experiments -----------------------------------------------------------------------------

std::vector<CoefficientEstimate> run_convergence(const ConvergenceSettings& s) {
  std::vector<std::vector<CoefficientEstimate>> per_rep(s.replications);
  parallel_for(per_rep.size(), s.threads, [&](std::size_t rep) {
    const auto scenario = make_scenario(ScenarioId::Conv, s.n, 6, derive_seed(s.seed, rep));
    const auto sim = generate(scenario);
    const int k = scenario.family.n_params();
    for (Method m : s.methods) {
      const auto cfg = make_config(m, scenario.family, sim.data.p(), s.step_length,
                                   split_iterations(m, s.total_iterations, k));
      const auto state = fit(cfg, sim.data);
      for (int param = 0; param < k; ++param) {
        for (std::size_t cov = 0; cov < sim.data.p(); ++cov) {
          const auto it = state.coefficients.find({param, cov});
          const auto truth = scenario.coefficients[param].find(cov);
          per_rep[rep].push_back(
              {static_cast<int>(rep), m, param, cov,
               it == state.coefficients.end() ? 0.0 : it->second.slope,
               truth == scenario.coefficients[param].end() ? 0.0 : truth->second});
        }
      }
    }
  });
  std::vector<CoefficientEstimate> out;
  for (auto& v : per_rep) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Table to_table(const std::vector<CoefficientEstimate>& rows, const DistributionFamily& family) {
  Table t{{"replication", "method", "parameter", "covariate", "estimate", "truth"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.replication), method_label(r.method),
                      family.param_names.at(r.param), fmt::format("x{}", r.covariate + 1),
                      format_number(r.estimate), format_number(r.truth)});
  }
  return t;
}

SpeedResult run_speed(const SpeedSettings& s) {
  const std::size_t steps = static_cast<std::size_t>(s.total_iterations) + 1;
  // traces[rep][method]
  std::vector<std::vector<std::vector<double>>> traces(s.replications);
  parallel_for(traces.size(), s.threads, [&](std::size_t rep) {
    const auto scenario =
        make_scenario(ScenarioId::Conv, s.n, 6 + s.p_noise, derive_seed(s.seed, rep));
    const auto sim = generate(scenario);
    for (Method m : s.methods) {
      const auto cfg = make_config(m, scenario.family, sim.data.p(), s.step_length,
                                   split_iterations(m, s.total_iterations, scenario.family.n_params()));
      auto trace = fit(cfg, sim.data).update_risk_trace();
      trace.resize(steps, trace.back());
      traces[rep].push_back(std::move(trace));
    }
  });
  SpeedResult out;
  out.methods = s.methods;
  out.p_noise = s.p_noise;
  out.mean_risk.assign(s.methods.size(), std::vector<double>(steps, 0.0));
  for (const auto& rep : traces) {
    for (std::size_t m = 0; m < rep.size(); ++m) {
      for (std::size_t t = 0; t < steps; ++t) out.mean_risk[m][t] += rep[m][t];
    }
  }
  for (auto& v : out.mean_risk) {
    for (auto& r : v) r /= std::max(1, s.replications);
  }
  return out;
}

Table to_table(const SpeedResult& r) {
  Table t{{"method", "p_noise", "iteration", "mean_risk"}, {}};
  for (std::size_t m = 0; m < r.methods.size(); ++m) {
    for (std::size_t step = 0; step < r.mean_risk[m].size(); ++step) {
      t.rows.push_back({method_label(r.methods[m]), std::to_string(r.p_noise), std::to_string(step),
                        format_number(r.mean_risk[m][step])});
    }
  }
  return t;
}

std::vector<RuntimeRow> run_runtime(const RuntimeSettings& s) {
  std::vector<RuntimeRow> out;
  for (int rep = 0; rep < s.replications; ++rep) {
    for (int d : s.dimensions) {
      if (d != 2 && d != 3) throw std::invalid_argument("runtime experiment supports d = 2 or 3");
      const auto id = d == 2 ? ScenarioId::S1A : ScenarioId::S3A;
      const auto scenario = make_scenario(id, s.n, 6, derive_seed(s.seed, rep, d));
      const auto sim = generate(scenario);
      for (Method m : s.methods) {
        const auto grid = m == Method::Cyclical ? make_grid(s.grid_max, s.grid_length, d)
                                                : path_grid(d * s.grid_max);
        auto cfg = make_config(m, scenario.family, sim.data.p(), s.step_length, grid.points.back());
        ResamplingPlan plan{s.resampling, s.folds, derive_seed(s.seed, rep, 100 + d)};
        const auto start = std::chrono::steady_clock::now();
        const auto cv = cv_risk(cfg, sim.data, plan, grid, s.threads);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        int total = 0;
        for (int v : cv.best_point) total += v;
        out.push_back({rep, d, m, cv.best_point, total, cv.mean_risk[cv.best_index], cv.path_fits,
                       cv.grid_evaluations, cv.folds_used, elapsed.count()});
      }
    }
  }
  return out;
}

Table to_table(const std::vector<RuntimeRow>& rows) {
  // Wall-clock seconds are left out so reruns reproduce the file byte for byte.
  Table t{{"replication", "dimensions", "method", "best_mstop", "best_total", "oob_risk", "path_fits",
           "grid_evaluations", "folds_used"},
          {}};
  for (const auto& r : rows) {
    std::string mstop;
    for (std::size_t k = 0; k < r.best_mstop.size(); ++k) {
      mstop += (k ? ";" : "") + std::to_string(r.best_mstop[k]);
    }
    t.rows.push_back({std::to_string(r.replication), std::to_string(r.dimensions),
                      method_label(r.method), mstop, std::to_string(r.best_total),
                      format_number(r.oob_risk), std::to_string(r.path_fits),
                      std::to_string(r.grid_evaluations), std::to_string(r.folds_used)});
  }
  return t;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 55; i <= 99; ++i) out.push_back(i / 100.0);
  return out;
}

std::vector<SweepRow> run_stabsweep(const SweepSettings& s) {
  const auto thresholds = s.thresholds.empty() ? default_thresholds() : s.thresholds;
  struct Job {
    ScenarioId scenario;
    Method method;
    std::size_t p;
    int rep;
  };
  std::vector<Job> jobs;
  for (auto id : s.scenarios) {
    for (Method m : s.methods) {
      for (std::size_t p : s.ps) {
        for (int rep = 0; rep < s.replications; ++rep) jobs.push_back({id, m, p, rep});
      }
    }
  }
  std::vector<std::vector<SweepRow>> per_job(jobs.size());
  parallel_for(jobs.size(), s.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    // Data depend on (scenario, p, rep) only, so methods see identical datasets.
    const std::uint64_t data_seed =
        derive_seed(s.seed, static_cast<std::uint64_t>(job.scenario), job.p * 1000 + job.rep);
    const auto scenario = make_scenario(job.scenario, s.n, job.p, data_seed);
    const auto sim = generate(scenario);
    auto cfg = make_config(job.method, scenario.family, sim.data.p(), s.step_length, {});
    const int p_eff = effective_p(cfg);
    std::vector<int> qs;
    for (int q : s.qs) {
      if (q <= p_eff) qs.push_back(q);
    }
    if (qs.empty()) return;
    StabSelConfig sc;
    sc.pi_thr = thresholds.front();
    sc.subsamples = s.subsamples;
    sc.mstop_cap = s.mstop_cap;
    sc.seed = derive_seed(data_seed, 7);
    sc.effective_p = p_eff;
    const auto results = run_stabsel_multi(sc, qs, cfg, sim.data, 1);
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
      for (double thr : thresholds) {
        const auto counts = tp_fp(stable_set(results[qi].frequencies, thr), sim.truth);
        per_job[j].push_back({job.scenario, job.method, job.p, job.rep, qs[qi], thr, counts.tp,
                              counts.fp, pfer_bound(qs[qi], thr, p_eff)});
      }
    }
  });
  std::vector<SweepRow> out;
  for (auto& v : per_job) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Table to_table(const std::vector<SweepRow>& rows) {
  Table t{{"scenario", "method", "p", "replication", "q", "pi_thr", "tp", "fp", "pfer_bound"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(scenario_name(r.scenario)), method_label(r.method),
                      std::to_string(r.p), std::to_string(r.replication), std::to_string(r.q),
                      format_number(r.pi_thr), std::to_string(r.tp), std::to_string(r.fp),
                      format_number(r.pfer_bound)});
  }
  return t;
}

Table run_experiment(const ExperimentSettings& settings) {
  return std::visit(
      [](const auto& s) -> Table {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConvergenceSettings>) {
          return to_table(run_convergence(s), normal_family());
        } else if constexpr (std::is_same_v<S, SpeedSettings>) {
          return to_table(run_speed(s));
        } else if constexpr (std::is_same_v<S, RuntimeSettings>) {
          return to_table(run_runtime(s));
        } else {
          return to_table(run_stabsweep(s));
        }
      },
      settings);
}

}  // namespace distboost
