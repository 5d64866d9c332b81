#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "distboost/engine.hpp"

namespace distboost {

/// The (q, pi_thr, PFER) triple violates the bound's admissible range.
class InfeasibleConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GivenPair { QAndPi, QAndPfer, PiAndPfer };

/// Upper bound on the expected number of false selections: q^2 / ((2 pi_thr - 1) p).
double pfer_bound(int q, double pi_thr, int effective_p);

struct StabSelConfig {
  int q = 0;
  double pi_thr = 0.0;
  double pfer = 0.0;
  GivenPair given = GivenPair::QAndPi;
  int effective_p = 0;
  int subsamples = 100;
  int mstop_cap = 1000;
  std::uint64_t seed = 1;
};

/// Completes the triple from any two of its members; the third holds the bound with equality
/// (q rounded down).
StabSelConfig resolve_triple(std::optional<int> q, std::optional<double> pi_thr,
                             std::optional<double> pfer, int effective_p);

using PairSet = std::set<ParamCovariate>;

struct StabSelResult {
  std::map<ParamCovariate, double> frequencies;
  PairSet stable_set;
  std::vector<PairSet> per_subsample_sets;
  int effective_p = 0;
  double pi_thr = 0.0;
  double pfer_bound = 0.0;
  std::vector<std::string> warnings;
};

/// Pairs whose selection frequency is at least `pi_thr`.
PairSet stable_set(const std::map<ParamCovariate, double>& frequencies, double pi_thr);

/// Number of (parameter, base-learner) candidates of a boosting configuration.
int effective_p(const BoostConfig& boost);

StabSelResult run_stabsel(const StabSelConfig& config, const BoostConfig& boost, const Dataset& data,
                          int threads = 1);

/// Fits each subsample once up to max(qs) distinct pairs and returns one result per q,
/// each thresholded at config.pi_thr. Results for the smaller q are exact prefixes.
std::vector<StabSelResult> run_stabsel_multi(const StabSelConfig& config, const std::vector<int>& qs,
                                             const BoostConfig& boost, const Dataset& data,
                                             int threads = 1);

struct TpFp {
  int tp = 0;
  int fp = 0;
};

TpFp tp_fp(const PairSet& stable, const PairSet& truth);
inline TpFp tp_fp(const StabSelResult& result, const PairSet& truth) {
  return tp_fp(result.stable_set, truth);
}

}  // namespace distboost
