#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "capscale/channel.hpp"

using namespace capscale;

namespace {

Positions positions(std::initializer_list<std::pair<double, double>> pts) {
  Positions p(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index i = 0;
  for (const auto& [x, y] : pts) p.col(i++) << x, y;
  return p;
}

std::vector<double> draws(const FadingModel& m, std::size_t count, std::uint64_t salt) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = m.sample(hash_combine(salt, k));
  return out;
}

}  // namespace

TEST_CASE("parameter validation") {
  ChannelParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.Gamma = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("fading catalogue and medians") {
  CHECK(FadingModel::trivial().sample(123) == 1.0);
  CHECK(model_median(FadingModel::trivial()) == 1.0);
  CHECK(model_median(FadingModel::rayleigh()) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // Gamma(2, 1/2) power: survival e^{-2x}(1 + 2x); oracle solved separately.
  const double nak = model_median(FadingModel::nakagami(2));
  CHECK(nak == doctest::Approx(0.8391734950083306).epsilon(1e-9));
  CHECK(std::exp(-2 * nak) * (1 + 2 * nak) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(FadingModel::from_name("exponential").kind == FadingKind::kRayleigh);
  CHECK(FadingModel::from_name("nakagami-3").shape == 3);
  CHECK(FadingModel::from_name("ricean-2").kind == FadingKind::kRicean);
  CHECK(FadingModel::from_name(FadingModel::ricean(2).name()).shape == doctest::Approx(2.0));
  CHECK_THROWS_AS(FadingModel::from_name("lognormal"), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::from_name("nakagami-x"), std::invalid_argument);
}

TEST_CASE("unit mean, tail and median checks by Monte Carlo") {
  const std::size_t count = 1000000;
  for (const FadingModel& m : {FadingModel::rayleigh(), FadingModel::nakagami(2), FadingModel::ricean(3)}) {
    CAPTURE(m.name());
    const auto s = draws(m, count, 0xabc);
    double mean = 0;
    for (double v : s) mean += v;
    mean /= count;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));

    std::size_t above_median = 0;
    for (double v : s) above_median += v >= m.f_m;
    const double sigma = 0.5 / std::sqrt(static_cast<double>(count));
    CHECK(static_cast<double>(above_median) / count >= 0.5 - 3 * sigma);

    for (double x = m.x1 + 0.25; x < m.x1 + 6; x += 0.5) {
      std::size_t over = 0;
      for (double v : s) over += v > x;
      const double bound = std::exp(-m.q * x);
      const double freq = static_cast<double>(over) / count;
      CHECK(freq <= bound + 3 * std::sqrt(bound * (1 - bound) / count) + 1e-12);
      CHECK(m.survival(x) <= bound + 1e-12);
    }
  }
}

TEST_CASE("pair fading is symmetric, keyed and lazy") {
  const PairFading pf(42, FadingModel::rayleigh());
  CHECK(pf(3, 9) == pf(9, 3));
  CHECK(pf(3, 9) == PairFading(42, FadingModel::rayleigh())(3, 9));
  CHECK(pf(3, 9) != PairFading(43, FadingModel::rayleigh())(3, 9));
  CHECK(fading_sample(pf, 1, 2) == pf(2, 1));
  CHECK_THROWS_AS(pf(4, 4), std::invalid_argument);
  CHECK(PairFading(1, FadingModel::trivial())(0, 1) == 1.0);

  std::vector<double> s;
  for (NodeId i = 0; i < 1000; ++i)
    for (NodeId j = i + 1; j < 1000; ++j) s.push_back(pf(i, j));
  double mean = 0;
  for (double v : s) mean += v;
  CHECK(mean / s.size() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("gain") {
  const Positions pos = positions({{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.0}});
  ChannelParams p;
  const PairFading trivial(1, FadingModel::trivial());
  CHECK(gain(trivial, p, 0, 1, pos) == doctest::Approx(16.0));
  CHECK_THROWS_AS(gain(trivial, p, 0, 2, pos), std::domain_error);
  p.alpha = 2.0;
  CHECK_THROWS_AS(gain(trivial, p, 0, 1, pos), std::invalid_argument);

  // K=2, alpha=3, f=0.5, d=1: pick a rayleigh draw and rescale the oracle.
  ChannelParams q;
  q.K = 2;
  q.alpha = 3;
  const PairFading ray(5, FadingModel::rayleigh());
  const Positions unit = positions({{-0.5, 0.0}, {0.5, 0.0}});
  CHECK(gain(ray, q, 0, 1, unit) == doctest::Approx(2.0 * ray(0, 1)));
}

TEST_CASE("SINR against a scalar recomputation") {
  const Positions pos = positions({{0.0, 0.0}, {0.1, 0.0}, {0.4, 0.3}, {-0.3, -0.2}});
  ChannelParams p;
  p.eta = 1e-3;
  const PairFading pf(11, FadingModel::rayleigh());
  const std::vector<NodeId> active{1, 2, 3};
  auto g = [&](NodeId i, NodeId j) {
    const double d = std::hypot(pos(0, i) - pos(0, j), pos(1, i) - pos(1, j));
    return p.K * pf(i, j) * std::pow(d, -p.alpha);
  };
  const double expect = g(1, 0) * p.P0 / (p.eta + g(2, 0) * p.P0 + g(3, 0) * p.P0);
  CHECK(sinr(0, 1, active, pf, p, pos) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(interference_at(0, 1, active, pf, p, pos) == doctest::Approx(g(2, 0) + g(3, 0)).epsilon(1e-12));

  const std::vector<NodeId> alone{1};
  CHECK(sinr(0, 1, alone, pf, p, pos) == doctest::Approx(g(1, 0) / p.eta));
  CHECK(sinr(0, 1, active, pf, p, pos) <= sinr(0, 1, std::vector<NodeId>{1, 2}, pf, p, pos));
  CHECK_THROWS_AS(sinr(0, 2, alone, pf, p, pos), std::invalid_argument);
  CHECK_THROWS_AS(sinr(1, 2, active, pf, p, pos), std::invalid_argument);
}

TEST_CASE("symmetric interferers double the interference") {
  const Positions pos = positions({{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.3}, {0.0, -0.3}});
  ChannelParams p;
  p.eta = 0.0 + 1e-12;
  const PairFading pf(1, FadingModel::trivial());
  const double one = interference_at(0, 1, std::vector<NodeId>{1, 2}, pf, p, pos);
  const double two = interference_at(0, 1, std::vector<NodeId>{1, 2, 3}, pf, p, pos);
  CHECK(two == doctest::Approx(2 * one));
}

TEST_CASE("rate") {
  ChannelParams p;
  CHECK(rate(1.0, p) == doctest::Approx(1.0));
  CHECK(rate(0.0, p) == 0.0);
  p.W = 2;
  CHECK(rate(3.0, p) == doctest::Approx(4.0));
  CHECK_THROWS_AS(rate(-0.1, p), std::invalid_argument);
  p = {};
  double prev = 0, prev_step = 1e9;
  for (double g = 0.5; g < 10; g += 0.5) {
    const double r = rate(g, p);
    CHECK(r > prev);
    CHECK(r - prev <= prev_step + 1e-12);
    prev_step = r - prev;
    prev = r;
  }
}

TEST_CASE("SINR floor and interference ceiling") {
  CHECK(sinr_floor(std::exp(1.0), 4.0, 1.0, 1.0) == doctest::Approx(1.0 / 25 * 6.0 / 7 / 25).epsilon(1e-12));
  CHECK(sinr_floor(std::exp(1.0), 4.0, 1.0, 1.0) == doctest::Approx(1.3714e-3).epsilon(1e-4));
  CHECK(sinr_floor(std::exp(2.0), 3.0, 2.0, 0.5) ==
        doctest::Approx(std::pow(5.0, -1.5) * 0.75 / 25 * 0.5).epsilon(1e-12));
  CHECK(sinr_floor(std::exp(2.0), 3.0, 2.0, 0.5) == doctest::Approx(1.3416e-3).epsilon(1e-4));

  ChannelParams p;
  CHECK(gamma_min(std::exp(1.0), FadingModel::trivial(), p) == doctest::Approx(1.3714e-3).epsilon(1e-4));
  CHECK_THROWS(gamma_min(1.0, FadingModel::trivial(), p));
  p.alpha = 2.0;
  CHECK_THROWS(gamma_min(100.0, FadingModel::trivial(), p));

  const ChannelParams unit;
  const Lattice lat(10, 8103);
  const double expect = 3 * std::log(8103.0) * 8 * std::pow(10.0, 4) * (7.0 / 6.0);
  CHECK(interference_upper_bound(8103, lat, FadingModel::trivial(), unit) == doctest::Approx(expect).epsilon(1e-12));
  // The ring sum is dominated by the closed form.
  double ring_sum = 1.0;
  for (int i = 2; i <= 1000; ++i) ring_sum += std::pow(3.0 * i - 2, 1 - 4.0);
  CHECK(ring_sum <= 7.0 / 6.0);
}
