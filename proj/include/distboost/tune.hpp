#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distboost/engine.hpp"

namespace distboost {

enum class ResamplingKind { SubsampleHalf, Bootstrap };

struct ResamplingPlan {
  ResamplingKind kind = ResamplingKind::SubsampleHalf;
  int folds = 25;
  std::uint64_t seed = 1;
};

struct Fold {
  std::vector<std::size_t> in_bag;      // may repeat for bootstrap
  std::vector<std::size_t> out_of_bag;  // sorted, disjoint from in_bag
};

/// Subsample: floor(n/2) rows without replacement. Bootstrap: n rows with replacement.
std::vector<Fold> make_folds(const ResamplingPlan& plan, std::size_t n);

struct MstopGrid {
  /// Each point has one entry for noncyclical methods, one per parameter for cyclical.
  std::vector<std::vector<int>> points;
  int max_per_param = 0;
  int length = 0;
};

/// Log-spaced axis from 1 to max_per_param (rounded, deduplicated). With n_params > 1 the
/// grid is the Cartesian product of that axis, in lexicographic order.
MstopGrid make_grid(int max_per_param, int length, int n_params);
std::vector<int> grid_axis(int max_per_param, int length);

/// Every iteration count 0..max as a scalar grid (free for noncyclical path evaluation).
MstopGrid path_grid(int max_iterations);

struct CvResult {
  MstopGrid grid;
  /// fold_risk[f][g]: mean out-of-bag negative log-likelihood per observation.
  std::vector<std::vector<double>> fold_risk;
  std::vector<double> mean_risk;
  std::size_t best_index = 0;
  std::vector<int> best_point;
  int folds_used = 0;
  /// Boosting-loop executions across all folds.
  std::uint64_t path_fits = 0;
  /// Grid points whose out-of-bag risk was evaluated, across all folds.
  std::uint64_t grid_evaluations = 0;
  std::vector<std::string> warnings;
};

/// Out-of-bag risk over an mstop grid. Each fold fits once per maximal path and reads the
/// risk of every grid point off that path.
CvResult cv_risk(const BoostConfig& config, const Dataset& data, const ResamplingPlan& plan,
                 const MstopGrid& grid, int threads = 1);

}  // namespace distboost
