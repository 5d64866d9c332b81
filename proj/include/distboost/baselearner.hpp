#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace distboost {

/// Covariates stored column-major plus a response vector.
class Dataset {
 public:
  Dataset() = default;
  /// `columns[j]` holds covariate j; all columns and `y` must share one length n >= 2.
  Dataset(std::vector<std::vector<double>> columns, std::vector<double> y,
          std::vector<std::string> column_names = {});

  std::size_t n() const { return y_.size(); }
  std::size_t p() const { return columns_.size(); }
  std::span<const double> column(std::size_t j) const { return columns_.at(j); }
  std::span<const double> y() const { return y_; }
  const std::vector<std::string>& column_names() const { return names_; }
  const std::vector<std::vector<double>>& columns() const { return columns_; }

  /// Row subset; indices may repeat (bootstrap draws).
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::vector<double>> columns_;
  std::vector<double> y_;
  std::vector<std::string> names_;
};

enum class LearnerKind { Linear, Ridge };

struct BaseLearnerSpec {
  std::size_t covariate = 0;
  LearnerKind kind = LearnerKind::Linear;
  double penalty = 0.0;
  bool include_intercept = true;

  static BaseLearnerSpec linear(std::size_t covariate) { return {covariate}; }
  static BaseLearnerSpec ridge(std::size_t covariate, double penalty) {
    return {covariate, LearnerKind::Ridge, penalty, true};
  }
};

struct FittedBaseLearner {
  BaseLearnerSpec spec;
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
};

/// Sufficient statistics of a target vector, shared by every learner fitted to it.
struct TargetSummary {
  double mean = 0.0;
  double centered_ss = 0.0;
  double raw_ss = 0.0;

  static TargetSummary of(std::span<const double> u);
};

/// A learner with its covariate statistics precomputed, so repeated fits cost one pass.
class PreparedLearner {
 public:
  PreparedLearner(const BaseLearnerSpec& spec, std::span<const double> x);

  const BaseLearnerSpec& spec() const { return spec_; }
  FittedBaseLearner fit(std::span<const double> x, std::span<const double> u,
                        const TargetSummary& target) const;

 private:
  BaseLearnerSpec spec_;
  double x_mean_ = 0.0;
  double centered_sxx_ = 0.0;
  double raw_sxx_ = 0.0;
  bool constant_ = false;
};

void validate(const BaseLearnerSpec& spec, const Dataset& data);

/// Least squares (ridge: slope penalized, intercept free) of u on one covariate.
FittedBaseLearner fit(const BaseLearnerSpec& spec, const Dataset& data, std::span<const double> u);

std::vector<double> predict(const FittedBaseLearner& fitted, const Dataset& data);

}  // namespace distboost
