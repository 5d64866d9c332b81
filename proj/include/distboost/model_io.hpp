#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "distboost/engine.hpp"

namespace distboost {

inline constexpr int kModelFormatVersion = 1;

/// Serializable fitted model. Slopes are keyed by column name, so prediction tolerates
/// reordered or extra columns in new data.
struct Model {
  DistributionFamily family;
  Method method = Method::NoncycInner;
  double step_length = 0.1;
  std::vector<int> mstop;
  std::vector<double> offsets;
  /// Per parameter: accumulated intercept of all selected learners.
  std::vector<double> intercepts;
  /// Per parameter: column name -> accumulated slope.
  std::vector<std::map<std::string, double>> slopes;

  static Model from_state(const FitState& state, Method method, std::vector<int> mstop,
                          const std::vector<std::string>& column_names);

  /// Additive predictors for rows given as named columns (each of length n).
  Predictors predict_etas(const std::map<std::string, std::vector<double>>& columns,
                          std::size_t n) const;
};

std::string to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace distboost
