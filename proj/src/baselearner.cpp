#include "distboost/baselearner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace distboost {

Dataset::Dataset(std::vector<std::vector<double>> columns, std::vector<double> y,
                 std::vector<std::string> column_names)
    : columns_(std::move(columns)), y_(std::move(y)), names_(std::move(column_names)) {
  if (y_.size() < 2) throw std::invalid_argument("dataset needs at least two observations");
  for (double v : y_) {
    if (!std::isfinite(v)) throw std::invalid_argument("response contains non-finite values");
  }
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != y_.size()) {
      throw std::invalid_argument(
          fmt::format("column {} has {} rows, response has {}", j, columns_[j].size(), y_.size()));
    }
    for (double v : columns_[j]) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument(fmt::format("column {} contains non-finite values", j));
      }
    }
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < columns_.size(); ++j) names_.push_back(fmt::format("x{}", j + 1));
  }
  if (names_.size() != columns_.size()) {
    throw std::invalid_argument("column name count does not match column count");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size(), std::vector<double>(rows.size()));
  std::vector<double> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    if (i >= n()) throw std::out_of_range("subset row index out of range");
    y[r] = y_[i];
    for (std::size_t j = 0; j < columns_.size(); ++j) cols[j][r] = columns_[j][i];
  }
  return Dataset(std::move(cols), std::move(y), names_);
}

TargetSummary TargetSummary::of(std::span<const double> u) {
  TargetSummary s;
  if (u.empty()) return s;
  double sum = 0.0;
  for (double v : u) sum += v;
  s.mean = sum / static_cast<double>(u.size());
  for (double v : u) {
    s.centered_ss += (v - s.mean) * (v - s.mean);
    s.raw_ss += v * v;
  }
  return s;
}

PreparedLearner::PreparedLearner(const BaseLearnerSpec& spec, std::span<const double> x)
    : spec_(spec) {
  if (x.empty()) return;
  double sum = 0.0;
  for (double v : x) sum += v;
  x_mean_ = sum / static_cast<double>(x.size());
  for (double v : x) {
    centered_sxx_ += (v - x_mean_) * (v - x_mean_);
    raw_sxx_ += v * v;
  }
  const double scale = std::max(1.0, raw_sxx_);
  constant_ = spec_.include_intercept ? centered_sxx_ <= 1e-14 * scale : raw_sxx_ == 0.0;
}

FittedBaseLearner PreparedLearner::fit(std::span<const double> x, std::span<const double> u,
                                       const TargetSummary& target) const {
  FittedBaseLearner out{spec_, 0.0, 0.0, 0.0};
  const double penalty = spec_.kind == LearnerKind::Ridge ? spec_.penalty : 0.0;
  if (spec_.include_intercept) {
    if (constant_ && penalty == 0.0) {
      out.intercept = target.mean;
      out.rss = target.centered_ss;
      return out;
    }
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - x_mean_) * u[i];
    const double slope = sxy / (centered_sxx_ + penalty);
    out.slope = slope;
    out.intercept = target.mean - slope * x_mean_;
    out.rss = std::max(0.0, target.centered_ss - 2.0 * slope * sxy + slope * slope * centered_sxx_);
    return out;
  }
  if (constant_ && penalty == 0.0) {
    out.rss = target.raw_ss;
    return out;
  }
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += x[i] * u[i];
  const double slope = sxy / (raw_sxx_ + penalty);
  out.slope = slope;
  out.rss = std::max(0.0, target.raw_ss - 2.0 * slope * sxy + slope * slope * raw_sxx_);
  return out;
}

void validate(const BaseLearnerSpec& spec, const Dataset& data) {
  if (spec.covariate >= data.p()) {
    throw std::out_of_range(
        fmt::format("covariate index {} out of range (p = {})", spec.covariate, data.p()));
  }
  if (spec.penalty < 0 || !std::isfinite(spec.penalty)) {
    throw std::invalid_argument("ridge penalty must be finite and non-negative");
  }
  if ((spec.kind == LearnerKind::Linear) != (spec.penalty == 0.0)) {
    throw std::invalid_argument("penalty must be zero exactly for linear learners");
  }
}

FittedBaseLearner fit(const BaseLearnerSpec& spec, const Dataset& data, std::span<const double> u) {
  validate(spec, data);
  if (u.size() != data.n()) {
    throw std::invalid_argument(
        fmt::format("target has length {}, dataset has {} rows", u.size(), data.n()));
  }
  const auto x = data.column(spec.covariate);
  return PreparedLearner(spec, x).fit(x, u, TargetSummary::of(u));
}

std::vector<double> predict(const FittedBaseLearner& fitted, const Dataset& data) {
  if (fitted.spec.covariate >= data.p()) throw std::out_of_range("covariate index out of range");
  const auto x = data.column(fitted.spec.covariate);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fitted.intercept + fitted.slope * x[i];
  return out;
}

}  // namespace distboost
