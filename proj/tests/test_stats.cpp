#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <vector>

#include "capscale/bounds.hpp"
#include "capscale/routing.hpp"
#include "capscale/stats.hpp"

using namespace capscale;

TEST_CASE("parallel_for visits every index once") {
  for (unsigned w : {1u, 3u, 16u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), w, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS(parallel_for(10, 4, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}

TEST_CASE("balls in urns") {
  SUBCASE("one urn always succeeds") {
    const Lemma1Result r = verify_lemma1(50, 100, 1, 0.5, 3);
    CHECK(r.frequency == 1.0);
    CHECK(r.consistent());
  }
  SUBCASE("vacuous bound at small n") {
    const Lemma1Result r = verify_lemma1(200, 100, 100, 0.5, 3);
    CHECK(r.bound < 0);
    CHECK(r.consistent());
    CHECK(r.frequency < 0.01);  // 100 urns of mean 1 almost surely hold an empty one
  }
  SUBCASE("large n agrees with the bound") {
    const Lemma1Result r = verify_lemma1(100, 100000, 50, 0.5, 5, 4);
    CHECK(r.bound == doctest::Approx(lemma1_bound(1e5, 50.0, 0.5)));
    CHECK(r.frequency == 1.0);
    CHECK(r.consistent());
  }
  SUBCASE("independent of worker count") {
    const Lemma1Result a = verify_lemma1(64, 5000, 20, 0.2, 9, 1);
    const Lemma1Result b = verify_lemma1(64, 5000, 20, 0.2, 9, 8);
    CHECK(a.successes == b.successes);
  }
}

TEST_CASE("maximum pairwise fading") {
  const Lemma2Result t = verify_lemma2(5, 300, FadingModel::trivial(), 1);
  CHECK(t.frequency == 1.0);
  CHECK(t.max_fading == 1.0);
  CHECK(t.threshold == doctest::Approx(3 * std::log(300.0)));

  const Lemma2Result e = verify_lemma2(200, 1000, FadingModel::rayleigh(), 2, kDefaultPairBudget, 4);
  CHECK(e.frequency >= 0.99);
  CHECK(!e.subsampled);
  CHECK(e.pairs_per_trial == 1000u * 999u / 2u);

  const Lemma2Result s = verify_lemma2(3, 1000, FadingModel::rayleigh(), 2, 1000);
  CHECK(s.subsampled);
  CHECK(s.pairs_per_trial == 1000u);
  CHECK(s.max_fading <= e.max_fading * 10);

  const PairFading pf(4, FadingModel::rayleigh());
  const auto [full, sub] = max_pair_fading(pf, 200, kDefaultPairBudget, 1);
  CHECK(!sub);
  double oracle = 0;
  for (NodeId i = 0; i < 200; ++i)
    for (NodeId j = i + 1; j < 200; ++j) oracle = std::max(oracle, pf(i, j));
  CHECK(full == oracle);
}

TEST_CASE("occupancy claims") {
  const auto inst = gen_asymmetric(100000, 0.75, 11, ChannelParams{}, FadingModel::trivial());
  const Lattice lat = build_lattice(1e5);
  const OccupancyReport r = verify_occupancy(inst, lat);
  REQUIRE(r.eq10);
  REQUIRE(r.eq11);
  REQUIRE(r.eq12);
  CHECK(!r.eq13);
  CHECK(!r.eq20);
  CHECK(*r.eq10);
  CHECK(*r.eq11);
  CHECK(*r.eq12);
  const double ln_n = std::log(1e5);
  CHECK(r.primary_min >= 4.5 * ln_n);
  CHECK(r.primary_max <= 13.5 * ln_n);
  CHECK(r.column_max <= 4.5 * std::sqrt(1e5 * ln_n));

  const auto low = gen_asymmetric(20000, 0.25, 11, ChannelParams{}, FadingModel::trivial());
  const OccupancyReport rl = verify_occupancy(low, build_lattice(2e4));
  REQUIRE(rl.eq13);
  CHECK(!rl.eq12);
  CHECK(*rl.eq13 == (rl.row_max <= 4));

  const auto mid = gen_asymmetric(5000, 0.5, 11, ChannelParams{}, FadingModel::trivial());
  const OccupancyReport rm = verify_occupancy(mid, build_lattice(5000));
  CHECK(!rm.eq12);
  CHECK(!rm.eq13);

  const auto cl = gen_cluster(20000, 0.6, 11, ChannelParams{}, FadingModel::trivial());
  const OccupancyReport rc = verify_occupancy(cl, scheme_lattice(cl));
  CHECK(rc.eq20);
  CHECK(rc.eq21);
  CHECK(!rc.eq10);
}

TEST_CASE("scaling fits") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {1e3, 1e4, 1e5}) pts.emplace_back(n, 3 * std::sqrt(n));
  const ScalingFit f = fit_scaling(pts);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(f.residual == doctest::Approx(0.0).epsilon(1e-10));

  pts.clear();
  for (double n : {1e3, 1e4, 1e5, 1e6}) pts.emplace_back(n, std::pow(n, 0.75) / std::log(n));
  const ScalingFit g = fit_scaling(pts);
  CHECK(g.slope > 0.6);
  CHECK(g.slope < 0.75);

  pts.clear();
  for (double n : {10.0, 20.0, 40.0}) pts.emplace_back(n, 7.0);
  CHECK(fit_scaling(pts).slope == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<std::pair<double, double>> two{{10, 1}, {20, 2}};
  CHECK_THROWS_AS(fit_scaling(two), std::invalid_argument);
  const std::vector<std::pair<double, double>> same{{10, 1}, {10, 2}, {10, 3}};
  CHECK_THROWS_AS(fit_scaling(same), std::invalid_argument);
  const std::vector<std::pair<double, double>> neg{{10, 1}, {20, -2}, {30, 3}};
  CHECK_THROWS_AS(fit_scaling(neg), std::invalid_argument);
}

TEST_CASE("campaigns are deterministic") {
  CampaignConfig cfg;
  cfg.model = TrafficModel::kAsymmetric;
  cfg.d = 0.75;
  cfg.n_grid = {500, 1000, 2000};
  cfg.trials = 2;
  cfg.seed = 42;
  cfg.simulate = true;

  cfg.workers = 1;
  const CampaignResult a = run_campaign(cfg);
  cfg.workers = 8;
  const CampaignResult b = run_campaign(cfg);
  REQUIRE(a.trials.size() == 6);
  REQUIRE(b.trials.size() == 6);
  for (std::size_t k = 0; k < a.trials.size(); ++k) {
    CHECK(a.trials[k].n == cfg.n_grid[k / 2]);
    CHECK(a.trials[k].trial == k % 2);
    CHECK(a.trials[k].seed == trial_seed(42, a.trials[k].n, k % 2));
    CHECK(a.trials[k].error.empty());
    CHECK(a.trials[k].aggregate == b.trials[k].aggregate);
    CHECK(a.trials[k].max_receptions == b.trials[k].max_receptions);
    CHECK(a.trials[k].floor_above == b.trials[k].floor_above);
  }
  REQUIRE(a.fit);
  CHECK(a.fit->slope == b.fit->slope);
  CHECK(a.claims.size() == b.claims.size());

  cfg.trials = 1;
  cfg.n_grid = {500};
  const CampaignResult one = run_campaign(cfg);
  CHECK(one.trials.size() == 1);
  CHECK(!one.fit);
  CHECK(trial_seed(42, 500, 0) != trial_seed(42, 500, 1));
  CHECK(trial_seed(42, 500, 0) != trial_seed(42, 1000, 0));
}

TEST_CASE("claim frequencies") {
  std::vector<TrialSummary> ts(4);
  ts[0].eq10 = true;
  ts[1].eq10 = false;
  ts[2].eq10 = true;
  ts[3].error = "failed";
  const auto claims = claim_frequencies(ts);
  bool found = false;
  for (const ClaimFrequency& c : claims) {
    if (c.claim != "eq10") continue;
    found = true;
    CHECK(c.held == 2);
    CHECK(c.evaluated == 3);
  }
  CHECK(found);
}

TEST_CASE("measured slope grows with d") {
  CampaignConfig cfg;
  cfg.n_grid = {1000, 4000, 16000};
  cfg.trials = 2;
  cfg.workers = 4;
  cfg.d = 0.25;
  const auto lo = run_campaign(cfg);
  cfg.d = 0.75;
  const auto hi = run_campaign(cfg);
  REQUIRE(lo.fit);
  REQUIRE(hi.fit);
  CHECK(lo.fit->slope < hi.fit->slope);
}
