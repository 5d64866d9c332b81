#include <doctest.h>

#include <cmath>

#include "distboost/engine.hpp"
#include "distboost/simgen.hpp"
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

std::vector<DistributionFamily> families() { return {normal_family(), negbin_family(), zinb_family()}; }

}  // namespace

TEST_CASE("zero iterations leave the offsets") {
  const auto d = oracle::random_instance(normal_family(), 30, 3, 1);
  for (auto m : {Method::Cyclical, Method::NoncycInner, Method::NoncycOuter}) {
    const auto c = config_for(normal_family(), m, m == Method::Cyclical ? std::vector{0, 0} : std::vector{0}, 3);
    const auto s = fit(c, d);
    CHECK(s.selection_log.empty());
    REQUIRE(s.risk_trace.size() == 1);
    CHECK(s.risk_trace[0] == doctest::Approx(nll(normal_family(), d.y(), s.etas)));
    const auto params = predict_params(s, d);
    CHECK(params[0][5] == doctest::Approx(s.offsets[0]));
    CHECK(params[1][5] == doctest::Approx(std::exp(s.offsets[1])));
  }
}

TEST_CASE("offset risk of a standard normal point") {
  const auto s = [] {
    FitState st;
    st.family = normal_family();
    st.etas = {{0.0}, {0.0}};
    st.risk_trace = {nll(normal_family(), std::vector{0.0}, st.etas)};
    return st;
  }();
  CHECK(risk(s) == doctest::Approx(0.9189).epsilon(1e-4));
}

TEST_CASE("decomposition, counts and risk recomputation") {
  for (const auto& f : families()) {
    const auto d = oracle::random_instance(f, 80, 4, 7);
    for (auto m : {Method::Cyclical, Method::NoncycInner, Method::NoncycOuter}) {
      std::vector<int> mstop = m == Method::Cyclical ? std::vector<int>(f.n_params(), 0) : std::vector{60};
      if (m == Method::Cyclical) {
        for (int k = 0; k < f.n_params(); ++k) mstop[k] = 40 - 10 * k;
      }
      const auto s = fit(config_for(f, m, mstop, 4), d);
      int expected = 0;
      for (int v : mstop) expected += v;
      CHECK(static_cast<int>(s.selection_log.size()) == expected);
      CHECK(s.risk_trace.size() == static_cast<std::size_t>(s.iterations) + 1);
      const auto replay = oracle::replay_etas(s, d);
      for (int k = 0; k < f.n_params(); ++k)
        for (std::size_t i = 0; i < d.n(); ++i) CHECK(std::abs(replay.back()[k][i] - s.etas[k][i]) <= 1e-8);
      CHECK(std::abs(risk(s) - nll(f, d.y(), s.etas)) <= 1e-10 * std::abs(risk(s)));
      CHECK(std::abs(risk(s) - oracle::total_nll(f, d.y(), s.etas)) <= 1e-9 * std::abs(risk(s)));
      const auto ur = s.update_risk_trace();
      CHECK(ur.size() == s.selection_log.size() + 1);
      CHECK(ur.back() == doctest::Approx(risk(s)));
    }
  }
}

TEST_CASE("cyclical counts per parameter and skip rule") {
  const auto f = zinb_family();
  const auto d = oracle::random_instance(f, 50, 3, 2);
  const auto s = fit(config_for(f, Method::Cyclical, {5, 2, 0}, 3), d);
  int counts[3] = {0, 0, 0};
  for (const auto& e : s.selection_log) ++counts[e.param];
  CHECK(counts[0] == 5);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 0);
  CHECK(s.iterations == 5);
  CHECK(s.selection_log[0].param == 0);
  CHECK(s.selection_log[1].param == 1);
  CHECK(s.selection_log[2].param == 0);
}

TEST_CASE("selections match exhaustive search") {
  for (const auto& f : families()) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto d = oracle::random_instance(f, 20, 3, seed);
      CAPTURE(f.name());
      CAPTURE(seed);

      const auto outer = fit(config_for(f, Method::NoncycOuter, {25}, 3), d);
      const auto etas = oracle::replay_etas(outer, d);
      for (std::size_t s = 0; s < outer.selection_log.size(); ++s) {
        const auto& e = outer.selection_log[s];
        const auto best = oracle::brute_force_outer(f, d, etas[s], 0.1);
        CHECK(e.param == best.param);
        CHECK(e.covariate == best.covariate);
        CHECK(e.risk_after == doctest::Approx(best.value).epsilon(1e-9));
      }

      const auto inner = fit(config_for(f, Method::NoncycInner, {25}, 3), d);
      const auto ietas = oracle::replay_etas(inner, d);
      for (std::size_t s = 0; s < inner.selection_log.size(); ++s) {
        const auto& e = inner.selection_log[s];
        oracle::Candidate best;
        for (int k = 0; k < f.n_params(); ++k) {
          const auto champ = oracle::brute_force_rss(f, d, ietas[s], k);
          const auto u = negative_gradient(f, d.y(), ietas[s], k);
          const auto ls = oracle::ols(d.column(champ.covariate), u);
          auto trial = ietas[s];
          for (std::size_t i = 0; i < d.n(); ++i) trial[k][i] += 0.1 * (ls.intercept + ls.slope * d.column(champ.covariate)[i]);
          const double v = oracle::total_nll(f, d.y(), trial);
          if (v < best.value) best = {k, champ.covariate, v};
        }
        CHECK(e.param == best.param);
        CHECK(e.covariate == best.covariate);
      }

      std::vector<int> mstop(f.n_params(), 10);
      const auto cyc = fit(config_for(f, Method::Cyclical, mstop, 3), d);
      const auto cetas = oracle::replay_etas(cyc, d);
      for (std::size_t s = 0; s < cyc.selection_log.size(); ++s) {
        const auto& e = cyc.selection_log[s];
        CHECK(e.covariate == oracle::brute_force_rss(f, d, cetas[s], e.param).covariate);
      }
    }
  }
}

TEST_CASE("cyclical with a frozen scale parameter is scalar boosting of the mean") {
  const auto d = oracle::random_instance(normal_family(), 40, 4, 9);
  const auto s = fit(config_for(normal_family(), Method::Cyclical, {30, 0}, 4), d);

  const auto y = d.y();
  double mean = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  double ss = 0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (y.size() - 1));
  std::vector<double> eta(y.size(), mean);
  std::vector<std::size_t> chosen;
  for (int m = 0; m < 30; ++m) {
    std::vector<double> u(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) u[i] = (y[i] - eta[i]) / (sd * sd);
    std::size_t best = 0;
    oracle::Ols bf{0, 0, INFINITY};
    for (std::size_t j = 0; j < d.p(); ++j) {
      const auto o = oracle::ols(d.column(j), u);
      if (o.rss < bf.rss) bf = o, best = j;
    }
    chosen.push_back(best);
    for (std::size_t i = 0; i < y.size(); ++i) eta[i] += 0.1 * (bf.intercept + bf.slope * d.column(best)[i]);
  }
  REQUIRE(s.selection_log.size() == 30);
  for (int m = 0; m < 30; ++m) CHECK(s.selection_log[m].covariate == chosen[m]);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(s.etas[0][i] == doctest::Approx(eta[i]).epsilon(1e-10));
}

TEST_CASE("prediction") {
  FitState s;
  s.family = normal_family();
  s.step_length = 0.1;
  s.p = 2;
  s.offsets = {1.0, 0.0};
  s.coefficients[{0, 1}] = {0.5, 2.0};
  s.coefficients[{1, 0}] = {0.0, -1.0};
  const Dataset nd({{0.0, 1.0}, {1.0, 3.0}}, {0.0, 0.0});
  const auto p = predict_params(s, nd);
  CHECK(p[0][0] == doctest::Approx(1.0 + 0.5 + 2.0));
  CHECK(p[0][1] == doctest::Approx(1.0 + 0.5 + 6.0));
  CHECK(p[1][0] == doctest::Approx(1.0));
  CHECK(p[1][1] == doctest::Approx(std::exp(-1.0)));
  const Dataset wrong({{0.0, 1.0}}, {0.0, 0.0});
  CHECK_THROWS(predict_params(s, wrong));

  const auto d = oracle::random_instance(zinb_family(), 60, 3, 4);
  const auto st = fit(config_for(zinb_family(), Method::NoncycInner, {40}, 3), d);
  const auto pp = predict_params(st, d);
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < d.n(); ++i)
      CHECK(std::abs(pp[k][i] - inverse_link(st.family.links[k], st.etas[k][i])) <= 1e-10);
}

TEST_CASE("determinism, observer and ties") {
  const auto d = oracle::random_instance(negbin_family(), 60, 5, 3);
  const auto c = config_for(negbin_family(), Method::NoncycOuter, {30}, 5);
  const auto a = fit(c, d);
  const auto b = fit(c, d);
  REQUIRE(a.selection_log.size() == b.selection_log.size());
  for (std::size_t s = 0; s < a.selection_log.size(); ++s) {
    CHECK(a.selection_log[s].covariate == b.selection_log[s].covariate);
    CHECK(a.selection_log[s].param == b.selection_log[s].param);
    CHECK(a.selection_log[s].slope == b.selection_log[s].slope);
  }

  int calls = 0;
  const auto halted = fit(c, d, [&](const FitState&) { return ++calls < 7; });
  CHECK(halted.selection_log.size() == 7);

  // Two identical columns: the lower index wins.
  auto cols = d.columns();
  cols.push_back(cols[0]);
  cols[1] = cols[0];
  const Dataset twin(cols, std::vector<double>(d.y().begin(), d.y().end()));
  const auto t = fit(config_for(negbin_family(), Method::NoncycInner, {30}, twin.p()), twin);
  for (const auto& e : t.selection_log) {
    CHECK(e.covariate != 1);
    CHECK(e.covariate != 5);
  }
}

TEST_CASE("configuration errors") {
  const auto d = oracle::random_instance(normal_family(), 20, 2, 1);
  auto c = config_for(normal_family(), Method::Cyclical, {5}, 2);
  CHECK_THROWS(fit(c, d));
  c = config_for(normal_family(), Method::NoncycInner, {5, 5}, 2);
  CHECK_THROWS(fit(c, d));
  c = config_for(normal_family(), Method::NoncycInner, {5}, 2);
  c.step_length = 1.0;
  CHECK_THROWS(fit(c, d));
  c.step_length = 0.1;
  c.learners[1].clear();
  CHECK_THROWS(fit(c, d));
  c = config_for(normal_family(), Method::NoncycInner, {-1}, 2);
  CHECK_THROWS(fit(c, d));
  CHECK_THROWS(method_from_name("greedy"));
}

TEST_CASE("training risk is non-increasing on the convergence design") {
  const auto sim = generate(make_scenario(ScenarioId::S1A, 500, 6, 123));
  for (auto m : {Method::Cyclical, Method::NoncycInner, Method::NoncycOuter}) {
    const auto c = config_for(normal_family(), m, m == Method::Cyclical ? std::vector{300, 300} : std::vector{600}, 6);
    const auto s = fit(c, sim.data);
    for (std::size_t t = 1; t < s.risk_trace.size(); ++t) CHECK(s.risk_trace[t] <= s.risk_trace[t - 1] + 1e-9);
  }
}
