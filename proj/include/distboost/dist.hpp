#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace distboost {

/// Additive predictors, one vector of length n per distribution parameter.
using Predictors = std::vector<std::vector<double>>;

enum class Link { Identity, Log, Logit };

enum class FamilyKind { Normal, NegBin, ZINB };

/// Lower clamp applied to inverse-log outputs and to both ends of inverse-logit.
inline constexpr double kParamFloor = 1e-10;

double link(Link l, double value);
double inverse_link(Link l, double eta);
std::string_view link_name(Link l);

/// Thrown when predictors contain non-finite values or shapes disagree.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when the response lies outside the family's support.
class ResponseDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct DistributionFamily {
  FamilyKind kind;
  std::vector<Link> links;
  std::vector<std::string> param_names;

  int n_params() const { return static_cast<int>(links.size()); }
  std::string_view name() const;
  bool is_count() const { return kind != FamilyKind::Normal; }
};

/// Normal with (mu: identity, sigma: log).
DistributionFamily normal_family();
/// Negative binomial, mean mu and dispersion sigma with Var = mu + sigma * mu^2; links (log, log).
DistributionFamily negbin_family();
/// Zero-inflated negative binomial; (mu, sigma) as negbin plus nu = P(structural zero) on logit.
DistributionFamily zinb_family();

DistributionFamily family_from_name(std::string_view name);

/// Throws ResponseDomainError if y is not in the family's support.
void check_response(const DistributionFamily& family, std::span<const double> y);

/// True when the response carries no information for fitting (constant normal response,
/// or all-zero counts).
bool is_degenerate_response(const DistributionFamily& family, std::span<const double> y);

/// Summed negative log-likelihood.
double nll(const DistributionFamily& family, std::span<const double> y, const Predictors& etas);

/// Summed negative log-likelihood with `eta_k` substituted for etas[param_index].
double nll_with(const DistributionFamily& family, std::span<const double> y, const Predictors& etas,
                int param_index, std::span<const double> eta_k);

/// Per-observation negative log-likelihood at a single predictor tuple.
double point_nll(const DistributionFamily& family, double y, std::span<const double> eta);

/// Negative partial derivative of the loss with respect to the additive predictor of
/// parameter `param_index` (0-based), one entry per observation.
std::vector<double> negative_gradient(const DistributionFamily& family, std::span<const double> y,
                                      const Predictors& etas, int param_index);

/// Constant starting values for each additive predictor, obtained by moment matching.
std::vector<double> offsets(const DistributionFamily& family, std::span<const double> y);

}  // namespace distboost
