#include "distboost/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <fmt/format.h>

namespace distboost {

namespace {

// Below this count, log-gamma and digamma differences are accumulated term by term,
// which stays accurate when the NB size parameter 1/sigma is large.
constexpr double kDirectSumLimit = 256.0;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// log Gamma(y + r) - log Gamma(r)
double log_rising(double y, double r) {
  if (y <= kDirectSumLimit) {
    double acc = 0.0;
    for (double j = 0; j < y; j += 1.0) acc += std::log(r + j);
    return acc;
  }
  return std::lgamma(y + r) - std::lgamma(r);
}

// digamma(y + r) - digamma(r)
double digamma_rising(double y, double r) {
  if (y <= kDirectSumLimit) {
    double acc = 0.0;
    for (double j = 0; j < y; j += 1.0) acc += 1.0 / (r + j);
    return acc;
  }
  return boost::math::digamma(y + r) - boost::math::digamma(r);
}

struct NegBinPoint {
  double log_pmf;
  double score_mu;     // d log p / d eta_mu
  double score_sigma;  // d log p / d eta_sigma
};

// Negative binomial in (mu, sigma) with Var = mu + sigma mu^2.
NegBinPoint negbin_point(double y, double mu, double sigma, bool want_scores) {
  const double r = 1.0 / sigma;
  const double sm = sigma * mu;
  const double l1p = std::log1p(sm);
  NegBinPoint out{};
  out.log_pmf = log_rising(y, r) - std::lgamma(y + 1.0) - l1p / sigma;
  if (y > 0) out.log_pmf += y * (std::log(sm) - l1p);
  if (want_scores) {
    out.score_mu = (y - mu) / (1.0 + sm);
    out.score_sigma = (l1p - digamma_rising(y, r)) / sigma + (y - mu) / (1.0 + sm);
  }
  return out;
}

double normal_point_nll(double y, double eta_mu, double eta_sigma) {
  const double sigma = inverse_link(Link::Log, eta_sigma);
  const double z = (y - eta_mu) / sigma;
  return std::log(sigma) + kHalfLog2Pi + 0.5 * z * z;
}

double negbin_point_nll(double y, double eta_mu, double eta_sigma) {
  const double mu = inverse_link(Link::Log, eta_mu);
  const double sigma = inverse_link(Link::Log, eta_sigma);
  return -negbin_point(y, mu, sigma, false).log_pmf;
}

double zinb_point_nll(double y, double eta_mu, double eta_sigma, double eta_nu) {
  const double mu = inverse_link(Link::Log, eta_mu);
  const double sigma = inverse_link(Link::Log, eta_sigma);
  const double nu = inverse_link(Link::Logit, eta_nu);
  const double lp = negbin_point(y, mu, sigma, false).log_pmf;
  if (y > 0) return -(std::log1p(-nu) + lp);
  return -std::log(nu + (1.0 - nu) * std::exp(lp));
}

double point_nll_unchecked(FamilyKind kind, double y, const double* eta) {
  switch (kind) {
    case FamilyKind::Normal: return normal_point_nll(y, eta[0], eta[1]);
    case FamilyKind::NegBin: return negbin_point_nll(y, eta[0], eta[1]);
    case FamilyKind::ZINB: return zinb_point_nll(y, eta[0], eta[1], eta[2]);
  }
  return 0.0;
}

void check_predictors(const DistributionFamily& family, std::size_t n, const Predictors& etas) {
  if (static_cast<int>(etas.size()) != family.n_params()) {
    throw InvalidInputError(fmt::format("{} family expects {} predictors, got {}", family.name(),
                                        family.n_params(), etas.size()));
  }
  for (std::size_t k = 0; k < etas.size(); ++k) {
    if (etas[k].size() != n) {
      throw InvalidInputError(fmt::format("predictor {} has length {}, response has {}", k,
                                          etas[k].size(), n));
    }
    for (double v : etas[k]) {
      if (!std::isfinite(v)) {
        throw InvalidInputError(fmt::format("non-finite value in predictor for {}",
                                            family.param_names[k]));
      }
    }
  }
}

void check_finite(std::span<const double> v, std::string_view what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInputError(fmt::format("non-finite value in {}", what));
  }
}

double sample_mean(std::span<const double> y) {
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double sample_variance(std::span<const double> y, double mean) {
  if (y.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(y.size() - 1);
}

// (log mean, log dispersion) by the method of moments.
std::pair<double, double> negbin_moment_offsets(std::span<const double> y) {
  constexpr double kMeanEps = 1e-10;
  constexpr double kMinDispersion = 0.01;
  if (y.empty()) return {0.0, 0.0};
  const double m = sample_mean(y);
  double dispersion = kMinDispersion;
  if (m > 0) dispersion = std::max((sample_variance(y, m) - m) / (m * m), kMinDispersion);
  return {std::log(m + kMeanEps), std::log(dispersion)};
}

}  // namespace

double link(Link l, double value) {
  switch (l) {
    case Link::Identity: return value;
    case Link::Log: return std::log(value);
    case Link::Logit: return std::log(value / (1.0 - value));
  }
  return value;
}

double inverse_link(Link l, double eta) {
  switch (l) {
    case Link::Identity: return eta;
    case Link::Log: return std::max(std::exp(eta), kParamFloor);
    case Link::Logit: {
      const double p = eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
      return std::clamp(p, kParamFloor, 1.0 - kParamFloor);
    }
  }
  return eta;
}

std::string_view link_name(Link l) {
  switch (l) {
    case Link::Identity: return "identity";
    case Link::Log: return "log";
    case Link::Logit: return "logit";
  }
  return "?";
}

std::string_view DistributionFamily::name() const {
  switch (kind) {
    case FamilyKind::Normal: return "normal";
    case FamilyKind::NegBin: return "negbin";
    case FamilyKind::ZINB: return "zinb";
  }
  return "?";
}

DistributionFamily normal_family() {
  return {FamilyKind::Normal, {Link::Identity, Link::Log}, {"mu", "sigma"}};
}

DistributionFamily negbin_family() {
  return {FamilyKind::NegBin, {Link::Log, Link::Log}, {"mu", "sigma"}};
}

DistributionFamily zinb_family() {
  return {FamilyKind::ZINB, {Link::Log, Link::Log, Link::Logit}, {"mu", "sigma", "nu"}};
}

DistributionFamily family_from_name(std::string_view name) {
  if (name == "normal") return normal_family();
  if (name == "negbin") return negbin_family();
  if (name == "zinb") return zinb_family();
  throw std::invalid_argument(fmt::format("unknown family '{}'", name));
}

void check_response(const DistributionFamily& family, std::span<const double> y) {
  for (double v : y) {
    if (!std::isfinite(v)) throw ResponseDomainError("response contains non-finite values");
    if (family.is_count() && (v < 0 || v != std::floor(v))) {
      throw ResponseDomainError(
          fmt::format("{} family needs non-negative integer counts, got {}", family.name(), v));
    }
  }
}

bool is_degenerate_response(const DistributionFamily& family, std::span<const double> y) {
  if (y.size() < 2) return true;
  if (family.is_count()) {
    return std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  }
  return std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
}

double point_nll(const DistributionFamily& family, double y, std::span<const double> eta) {
  if (static_cast<int>(eta.size()) != family.n_params()) {
    throw InvalidInputError("predictor tuple has wrong length");
  }
  check_finite(eta, "predictor");
  const double v[] = {y};
  check_response(family, v);
  return point_nll_unchecked(family.kind, y, eta.data());
}

double nll(const DistributionFamily& family, std::span<const double> y, const Predictors& etas) {
  check_predictors(family, y.size(), etas);
  check_response(family, y);
  const int k = family.n_params();
  double eta[3];
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int p = 0; p < k; ++p) eta[p] = etas[p][i];
    total += point_nll_unchecked(family.kind, y[i], eta);
  }
  return total;
}

double nll_with(const DistributionFamily& family, std::span<const double> y, const Predictors& etas,
                int param_index, std::span<const double> eta_k) {
  if (param_index < 0 || param_index >= family.n_params()) {
    throw InvalidInputError("parameter index out of range");
  }
  if (eta_k.size() != y.size()) throw InvalidInputError("replacement predictor has wrong length");
  check_finite(eta_k, "replacement predictor");
  const int k = family.n_params();
  double eta[3];
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int p = 0; p < k; ++p) eta[p] = p == param_index ? eta_k[i] : etas[p][i];
    total += point_nll_unchecked(family.kind, y[i], eta);
  }
  return total;
}

std::vector<double> negative_gradient(const DistributionFamily& family, std::span<const double> y,
                                      const Predictors& etas, int param_index) {
  if (param_index < 0 || param_index >= family.n_params()) {
    throw InvalidInputError(fmt::format("parameter index {} out of range for {} family",
                                        param_index, family.name()));
  }
  check_predictors(family, y.size(), etas);
  check_response(family, y);

  const std::size_t n = y.size();
  std::vector<double> u(n);
  switch (family.kind) {
    case FamilyKind::Normal:
      for (std::size_t i = 0; i < n; ++i) {
        const double sigma = inverse_link(Link::Log, etas[1][i]);
        const double r = y[i] - etas[0][i];
        const double s2 = sigma * sigma;
        u[i] = param_index == 0 ? r / s2 : r * r / s2 - 1.0;
      }
      break;
    case FamilyKind::NegBin:
      for (std::size_t i = 0; i < n; ++i) {
        const auto pt = negbin_point(y[i], inverse_link(Link::Log, etas[0][i]),
                                     inverse_link(Link::Log, etas[1][i]), true);
        u[i] = param_index == 0 ? pt.score_mu : pt.score_sigma;
      }
      break;
    case FamilyKind::ZINB:
      for (std::size_t i = 0; i < n; ++i) {
        const double nu = inverse_link(Link::Logit, etas[2][i]);
        const bool need_nb = param_index != 2 || y[i] == 0;
        NegBinPoint pt{};
        if (need_nb) {
          pt = negbin_point(y[i], inverse_link(Link::Log, etas[0][i]),
                            inverse_link(Link::Log, etas[1][i]), true);
        }
        if (y[i] > 0) {
          u[i] = param_index == 0 ? pt.score_mu : param_index == 1 ? pt.score_sigma : -nu;
          continue;
        }
        // Zero: L = nu + (1 - nu) p0.
        const double p0 = std::exp(pt.log_pmf);
        const double mixture = nu + (1.0 - nu) * p0;
        const double nb_weight = (1.0 - nu) * p0 / mixture;
        if (param_index == 0) {
          u[i] = nb_weight * pt.score_mu;
        } else if (param_index == 1) {
          u[i] = nb_weight * pt.score_sigma;
        } else {
          u[i] = nu * (1.0 - nu) * (1.0 - p0) / mixture;
        }
      }
      break;
  }
  return u;
}

std::vector<double> offsets(const DistributionFamily& family, std::span<const double> y) {
  if (y.empty()) throw InvalidInputError("offsets need at least one observation");
  check_response(family, y);
  switch (family.kind) {
    case FamilyKind::Normal: {
      const double m = sample_mean(y);
      const double sd = std::sqrt(sample_variance(y, m));
      return {m, sd > 0 ? std::log(sd) : 0.0};
    }
    case FamilyKind::NegBin: {
      const auto [lm, ls] = negbin_moment_offsets(y);
      return {lm, ls};
    }
    case FamilyKind::ZINB: {
      std::vector<double> positive;
      for (double v : y) {
        if (v > 0) positive.push_back(v);
      }
      const auto [lm, ls] = negbin_moment_offsets(positive);
      const double zero_frac =
          1.0 - static_cast<double>(positive.size()) / static_cast<double>(y.size());
      return {lm, ls, link(Link::Logit, std::clamp(zero_frac, 0.01, 0.99))};
    }
  }
  return {};
}

}  // namespace distboost
