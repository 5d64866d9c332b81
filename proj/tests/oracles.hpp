#pragma once

// Independent reference implementations used to check the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "distboost/engine.hpp"

namespace oracle {

using distboost::DistributionFamily;
using distboost::FamilyKind;

inline double clamp_pos(double eta) { return std::max(std::exp(eta), 1e-10); }
inline double clamp_prob(double eta) {
  const double p = 1.0 / (1.0 + std::exp(-eta));
  return std::min(std::max(p, 1e-10), 1.0 - 1e-10);
}

// Direct log-gamma form of the negative binomial with Var = mu + sigma mu^2.
inline double nb_logpmf(double y, double mu, double sigma) {
  const double r = 1.0 / sigma;
  return std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) + r * std::log(r / (r + mu)) +
         y * std::log(mu / (r + mu));
}

inline double point_nll(const DistributionFamily& f, double y, const std::vector<double>& eta) {
  switch (f.kind) {
    case FamilyKind::Normal: {
      const double mu = eta[0];
      const double sd = clamp_pos(eta[1]);
      return std::log(sd) + 0.5 * std::log(2.0 * M_PI) + (y - mu) * (y - mu) / (2.0 * sd * sd);
    }
    case FamilyKind::NegBin:
      return -nb_logpmf(y, clamp_pos(eta[0]), clamp_pos(eta[1]));
    case FamilyKind::ZINB: {
      const double mu = clamp_pos(eta[0]);
      const double sigma = clamp_pos(eta[1]);
      const double nu = clamp_prob(eta[2]);
      if (y == 0.0) return -std::log(nu + (1.0 - nu) * std::exp(nb_logpmf(0.0, mu, sigma)));
      return -std::log(1.0 - nu) - nb_logpmf(y, mu, sigma);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double total_nll(const DistributionFamily& f, std::span<const double> y,
                        const distboost::Predictors& etas) {
  double s = 0.0;
  std::vector<double> eta(etas.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t k = 0; k < etas.size(); ++k) eta[k] = etas[k][i];
    s += point_nll(f, y[i], eta);
  }
  return s;
}

// Central finite difference of the per-observation loss, negated.
inline double fd_negative_gradient(const DistributionFamily& f, double y, std::vector<double> eta,
                                   int k, double h = 1e-6) {
  const double e = eta[k];
  eta[k] = e + h;
  const double up = point_nll(f, y, eta);
  eta[k] = e - h;
  const double down = point_nll(f, y, eta);
  return -(up - down) / (2.0 * h);
}

struct Ols {
  double intercept;
  double slope;
  double rss;
};

// Least squares of u on (1, x) via the 2x2 normal equations; constant x gives slope 0.
inline Ols ols(std::span<const double> x, std::span<const double> u, double penalty = 0.0) {
  const double n = static_cast<double>(x.size());
  double sx = 0, su = 0, sxx = 0, sxu = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    su += u[i];
    sxx += x[i] * x[i];
    sxu += x[i] * u[i];
  }
  const double cxx = sxx - sx * sx / n;
  const double cxu = sxu - sx * su / n;
  const double b = (cxx + penalty) > 0 ? cxu / (cxx + penalty) : 0.0;
  const double a = (su - b * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = u[i] - a - b * x[i];
    rss += r * r;
  }
  return {a, b, rss};
}

// Rebuilds the predictors before each logged update from the offsets and earlier entries.
inline std::vector<distboost::Predictors> replay_etas(const distboost::FitState& s,
                                                      const distboost::Dataset& d) {
  std::vector<distboost::Predictors> out;
  distboost::Predictors etas(s.offsets.size(), std::vector<double>(d.n()));
  for (std::size_t k = 0; k < etas.size(); ++k) std::fill(etas[k].begin(), etas[k].end(), s.offsets[k]);
  for (const auto& e : s.selection_log) {
    out.push_back(etas);
    const auto x = d.column(e.covariate);
    for (std::size_t i = 0; i < d.n(); ++i) {
      etas[e.param][i] += s.step_length * (e.intercept + e.slope * x[i]);
    }
  }
  out.push_back(etas);
  return out;
}

struct Candidate {
  int param = -1;
  std::size_t covariate = 0;
  double value = std::numeric_limits<double>::infinity();
};

// Exhaustive post-update loss minimization over every (parameter, covariate).
inline Candidate brute_force_outer(const DistributionFamily& f, const distboost::Dataset& d,
                                   const distboost::Predictors& etas, double nu) {
  Candidate best;
  for (int k = 0; k < f.n_params(); ++k) {
    const auto u = distboost::negative_gradient(f, d.y(), etas, k);
    for (std::size_t j = 0; j < d.p(); ++j) {
      const auto fit = ols(d.column(j), u);
      auto trial = etas;
      const auto x = d.column(j);
      for (std::size_t i = 0; i < d.n(); ++i) trial[k][i] += nu * (fit.intercept + fit.slope * x[i]);
      const double v = total_nll(f, d.y(), trial);
      if (v < best.value) best = {k, j, v};
    }
  }
  return best;
}

// Exhaustive RSS minimization for one parameter.
inline Candidate brute_force_rss(const DistributionFamily& f, const distboost::Dataset& d,
                                 const distboost::Predictors& etas, int k) {
  Candidate best;
  const auto u = distboost::negative_gradient(f, d.y(), etas, k);
  for (std::size_t j = 0; j < d.p(); ++j) {
    const double v = ols(d.column(j), u).rss;
    if (v < best.value) best = {k, j, v};
  }
  return best;
}

// Uniform(-1, 1) design with a response drawn from the given family at moderate parameters.
inline distboost::Dataset random_instance(const DistributionFamily& f, std::size_t n, std::size_t p,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (auto& c : cols)
    for (auto& v : c) v = unif(rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = cols[0][i];
    const double b = cols[std::min<std::size_t>(1, p - 1)][i];
    switch (f.kind) {
      case FamilyKind::Normal:
        y[i] = std::normal_distribution<double>(a + 2 * b, std::exp(0.5 * a))(rng);
        break;
      case FamilyKind::NegBin:
      case FamilyKind::ZINB: {
        const double mu = std::exp(1.0 + 0.5 * a - 0.5 * b);
        const double sigma = 0.5;
        std::gamma_distribution<double> g(1.0 / sigma, mu * sigma);
        y[i] = static_cast<double>(std::poisson_distribution<long>(g(rng))(rng));
        if (f.kind == FamilyKind::ZINB && unif(rng) < -0.4) y[i] = 0.0;
        break;
      }
    }
  }
  return distboost::Dataset(std::move(cols), std::move(y));
}

}  // namespace oracle
