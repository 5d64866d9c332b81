#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "distboost/simgen.hpp"
#include "distboost/tune.hpp"
#include "oracles.hpp"

using namespace distboost;

namespace {

BoostConfig config_for(const DistributionFamily& f, Method m, std::vector<int> mstop, std::size_t p) {
  BoostConfig c;
  c.family = f;
  c.method = m;
  c.mstop = std::move(mstop);
  c.learners = linear_learners(f.n_params(), p);
  return c;
}

double oob_mean_risk(const FitState& s, const Dataset& data, const Fold& fold) {
  const auto oob = data.subset(fold.out_of_bag);
  return oracle::total_nll(s.family, oob.y(), predict_etas(s, oob)) / oob.n();
}

}  // namespace

TEST_CASE("grid axis") {
  const auto axis = grid_axis(300, 10);
  REQUIRE(axis.size() == 10);
  CHECK(axis.front() == 1);
  CHECK(axis.back() == 300);
  for (int i = 0; i < 10; ++i) CHECK(axis[i] == static_cast<int>(std::lround(std::exp(std::log(300.0) * i / 9.0))));
  CHECK(std::is_sorted(axis.begin(), axis.end()));
  CHECK(std::adjacent_find(axis.begin(), axis.end()) == axis.end());

  const auto dense = grid_axis(12, 10);
  CHECK(std::adjacent_find(dense.begin(), dense.end()) == dense.end());
  CHECK(dense.back() == 12);
  CHECK(grid_axis(1, 2) == std::vector<int>{1});
}

TEST_CASE("grids") {
  const auto g1 = make_grid(300, 10, 1);
  CHECK(g1.points.size() == 10);
  CHECK(g1.points.back() == std::vector<int>{300});
  const auto g2 = make_grid(300, 10, 2);
  CHECK(g2.points.size() == 100);
  CHECK(std::is_sorted(g2.points.begin(), g2.points.end()));
  const auto axis = grid_axis(300, 10);
  for (const auto& pt : g2.points)
    for (int v : pt) CHECK(std::find(axis.begin(), axis.end(), v) != axis.end());
  CHECK(make_grid(50, 4, 3).points.size() == 64);
  const auto path = path_grid(5);
  CHECK(path.points.size() == 6);
  CHECK(path.points.front() == std::vector<int>{0});
  CHECK_THROWS(make_grid(300, 1, 1));
}

TEST_CASE("folds") {
  const auto sub = make_folds({ResamplingKind::SubsampleHalf, 6, 3}, 41);
  REQUIRE(sub.size() == 6);
  for (const auto& f : sub) {
    CHECK(f.in_bag.size() == 20);
    CHECK(f.out_of_bag.size() == 21);
    std::set<std::size_t> in(f.in_bag.begin(), f.in_bag.end());
    CHECK(in.size() == 20);
    for (auto i : f.out_of_bag) CHECK(in.count(i) == 0);
  }
  const auto boot = make_folds({ResamplingKind::Bootstrap, 4, 3}, 50);
  for (const auto& f : boot) {
    CHECK(f.in_bag.size() == 50);
    std::set<std::size_t> in(f.in_bag.begin(), f.in_bag.end());
    CHECK(in.size() + f.out_of_bag.size() == 50);
    for (auto i : f.out_of_bag) CHECK(in.count(i) == 0);
  }
  CHECK(make_folds({ResamplingKind::Bootstrap, 4, 3}, 50)[2].in_bag == boot[2].in_bag);
  CHECK_THROWS(make_folds({ResamplingKind::SubsampleHalf, 1, 3}, 50));
}

TEST_CASE("grid point zero is the out-of-bag offset risk") {
  const auto d = oracle::random_instance(negbin_family(), 60, 3, 8);
  const ResamplingPlan plan{ResamplingKind::SubsampleHalf, 5, 21};
  const auto r = cv_risk(config_for(negbin_family(), Method::NoncycInner, {0}, 3), d, plan, path_grid(0));
  const auto folds = make_folds(plan, d.n());
  REQUIRE(r.fold_risk.size() == 5);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto in = d.subset(folds[f].in_bag);
    const auto off = offsets(negbin_family(), in.y());
    const auto oob = d.subset(folds[f].out_of_bag);
    const Predictors etas{std::vector<double>(oob.n(), off[0]), std::vector<double>(oob.n(), off[1])};
    CHECK(r.fold_risk[f][0] == doctest::Approx(oracle::total_nll(negbin_family(), oob.y(), etas) / oob.n()).epsilon(1e-12));
  }
}

TEST_CASE("noncyclical path risk equals refitting at each point, with one fit per fold") {
  const auto sim = generate(make_scenario(ScenarioId::S1A, 200, 8, 4));
  const ResamplingPlan plan{ResamplingKind::Bootstrap, 4, 5};
  const auto grid = make_grid(120, 6, 1);
  for (auto m : {Method::NoncycInner, Method::NoncycOuter}) {
    const auto cfg = config_for(normal_family(), m, grid.points.back(), 8);
    const auto before = fit_invocations();
    const auto r = cv_risk(cfg, sim.data, plan, grid);
    CHECK(fit_invocations() - before == 4);
    CHECK(r.path_fits == 4);
    CHECK(r.grid_evaluations == 4 * grid.points.size());
    const auto folds = make_folds(plan, sim.data.n());
    for (std::size_t g : {std::size_t{0}, std::size_t{3}, grid.points.size() - 1}) {
      auto c = cfg;
      c.mstop = grid.points[g];
      const auto s = fit(c, sim.data.subset(folds[1].in_bag));
      CHECK(r.fold_risk[1][g] == doctest::Approx(oob_mean_risk(s, sim.data, folds[1])).epsilon(1e-10));
    }
    CHECK(r.best_point[0] > grid.points.front()[0]);
  }
}

TEST_CASE("cyclical grid risk equals refitting at each tuple") {
  const auto sim = generate(make_scenario(ScenarioId::S1A, 150, 6, 9));
  const ResamplingPlan plan{ResamplingKind::SubsampleHalf, 3, 2};
  const auto grid = make_grid(40, 4, 2);
  const auto cfg = config_for(normal_family(), Method::Cyclical, grid.points.back(), 6);
  const auto r = cv_risk(cfg, sim.data, plan, grid);
  CHECK(r.grid_evaluations == 3 * grid.points.size());
  CHECK(r.path_fits < 3 * grid.points.size());
  const auto folds = make_folds(plan, sim.data.n());
  for (std::size_t g = 0; g < grid.points.size(); ++g) {
    auto c = cfg;
    c.mstop = grid.points[g];
    const auto s = fit(c, sim.data.subset(folds[2].in_bag));
    CAPTURE(g);
    CHECK(r.fold_risk[2][g] == doctest::Approx(oob_mean_risk(s, sim.data, folds[2])).epsilon(1e-10));
  }
  const auto best = std::min_element(r.mean_risk.begin(), r.mean_risk.end()) - r.mean_risk.begin();
  CHECK(static_cast<std::size_t>(best) == r.best_index);
  CHECK(r.best_point == grid.points[r.best_index]);
}

TEST_CASE("folds with a degenerate in-bag response are dropped") {
  std::vector<double> y(20, 0.0);
  y[3] = 2.0;
  std::vector<std::vector<double>> cols{std::vector<double>(20)};
  for (int i = 0; i < 20; ++i) cols[0][i] = i * 0.1;
  const Dataset d(cols, y);
  const auto r = cv_risk(config_for(negbin_family(), Method::NoncycInner, {5}, 1), d,
                         {ResamplingKind::SubsampleHalf, 10, 1}, make_grid(5, 2, 1));
  CHECK(r.folds_used < 10);
  CHECK(r.folds_used > 0);
  CHECK(r.warnings.size() == static_cast<std::size_t>(10 - r.folds_used));
  CHECK(r.fold_risk.size() == static_cast<std::size_t>(r.folds_used));
}

TEST_CASE("grid dimensionality must match the method") {
  const auto d = oracle::random_instance(normal_family(), 30, 2, 1);
  CHECK_THROWS(cv_risk(config_for(normal_family(), Method::Cyclical, {5, 5}, 2), d, {}, make_grid(5, 2, 1)));
  CHECK_THROWS(cv_risk(config_for(normal_family(), Method::NoncycInner, {5}, 2), d, {}, make_grid(5, 2, 2)));
}
