#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "capscale/geometry.hpp"

using namespace capscale;

TEST_CASE("lattice side from node count") {
  // Oracle: direct rounding of sqrt(n / (9 ln n)).
  for (double n : {3.0, 100.0, 8103.0, 1e5, 1e6}) {
    const int expect = std::max(1, static_cast<int>(std::lround(std::sqrt(n / (9 * std::log(n))))));
    CHECK(build_lattice(n).r() == expect);
  }
  CHECK(build_lattice(8103).r() == 10);
  CHECK(build_lattice(8103).cell_count() == 100);
  CHECK(build_lattice(3).r() == 1);
  CHECK(build_lattice(1e6).r() == 90);
  CHECK_THROWS_AS(build_lattice(1), std::invalid_argument);
  const Lattice lat = build_lattice(1e6);
  CHECK(lat.side() * lat.r() == doctest::Approx(1.0));
}

TEST_CASE("cell lookup") {
  const Lattice lat(10, 8103);
  CHECK(cell_of({-0.5, -0.5}, lat) == CellCoord{1, 1});
  CHECK(cell_of({0.5, 0.5}, lat) == CellCoord{10, 10});
  CHECK(cell_of({0.0, -0.26}, lat) == CellCoord{6, 3});
  CHECK_THROWS_AS(cell_of({0.6, 0.0}, lat), std::invalid_argument);
  CHECK_THROWS_AS(cell_of({0.0, -0.51}, lat), std::invalid_argument);
}

TEST_CASE("center round trip and partition") {
  for (int r : {1, 2, 7, 30}) {
    const Lattice lat(r, 100);
    std::set<std::size_t> seen;
    for (int v1 = 1; v1 <= r; ++v1) {
      for (int v2 = 1; v2 <= r; ++v2) {
        const CellCoord c{v1, v2};
        CHECK(cell_of(lat.center(c), lat) == c);
        CHECK(lat.coord(lat.index(c)) == c);
        seen.insert(lat.index(c));
      }
    }
    CHECK(seen.size() == static_cast<std::size_t>(r * r));
  }
}

TEST_CASE("neighbors") {
  const Lattice lat(10, 8103);
  const auto corner = neighbors({1, 1}, lat);
  CHECK(std::set<CellCoord>(corner.begin(), corner.end()) == std::set<CellCoord>{{2, 1}, {1, 2}});
  const auto inner = neighbors({5, 5}, lat);
  CHECK(std::set<CellCoord>(inner.begin(), inner.end()) ==
        std::set<CellCoord>{{4, 5}, {6, 5}, {5, 4}, {5, 6}});
  CHECK(neighbors({1, 5}, lat).size() == 3);
  CHECK(neighbors({1, 1}, Lattice(1, 3)).empty());
}

TEST_CASE("sub-lattice classes") {
  CHECK(sublattice_of({1, 1}) == 0);
  CHECK(sublattice_of({4, 1}) == 0);
  CHECK(sublattice_of({2, 3}) == 5);
  std::set<int> ids;
  for (int v1 = 1; v1 <= 9; ++v1)
    for (int v2 = 1; v2 <= 9; ++v2) ids.insert(sublattice_of({v1, v2}));
  CHECK(ids.size() == 9);
}

TEST_CASE("ring index") {
  CHECK(ring_index({5, 5}, {8, 5}) == 1);
  CHECK(ring_index({5, 5}, {5, 5}) == 0);
  CHECK(ring_index({5, 5}, {11, 8}) == 2);
  CHECK_THROWS_AS(ring_index({5, 5}, {6, 5}), std::invalid_argument);
}

// Box-to-box Euclidean gap between two cells, computed from cell bounds.
static double cell_gap(const CellCoord& a, const CellCoord& b, double x0) {
  const double gx = std::max(0, std::abs(a.v1 - b.v1) - 1) * x0;
  const double gy = std::max(0, std::abs(a.v2 - b.v2) - 1) * x0;
  return std::hypot(gx, gy);
}

TEST_CASE("ring population and separation, exhaustive up to r = 30") {
  for (int r : {3, 10, 30}) {
    const Lattice lat(r, 1000);
    for (int c1 = 1; c1 <= r; ++c1) {
      for (int c2 = 1; c2 <= r; ++c2) {
        const CellCoord center{c1, c2};
        std::vector<int> population(static_cast<std::size_t>(r) + 1, 0);
        for (int v1 = 1; v1 <= r; ++v1) {
          for (int v2 = 1; v2 <= r; ++v2) {
            const CellCoord other{v1, v2};
            if (sublattice_of(other) != sublattice_of(center) || other == center) continue;
            CHECK((std::abs(v1 - c1) >= 3 || std::abs(v2 - c2) >= 3));
            const int i = ring_index(center, other);
            ++population[static_cast<std::size_t>(i)];
            CHECK(cell_gap(center, other, lat.side()) >= ring_min_distance(i, lat) - 1e-12);
          }
        }
        for (std::size_t i = 1; i < population.size(); ++i) CHECK(population[i] <= 8 * static_cast<int>(i));
      }
    }
  }
}

TEST_CASE("placement") {
  Rng rng(5);
  CHECK(place_nodes(0, rng).cols() == 0);
  const Positions p = place_nodes(100000, rng);
  CHECK(std::abs(p.row(0).mean()) < 0.01);
  CHECK(p.minCoeff() >= -0.5);
  CHECK(p.maxCoeff() <= 0.5);

  Rng a(9), b(9);
  CHECK(place_nodes(50, a) == place_nodes(50, b));
}

TEST_CASE("per-cell counts follow the binomial band") {
  // Oracle: Binomial(1e5, 1/100) has sd ~ sqrt(990); +-3 sd covers 99.7%.
  const Lattice lat(10, 1e5);
  std::size_t inside = 0, total = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    Rng rng(derive_seed(77, t));
    const Positions p = place_nodes(100000, rng);
    std::vector<int> counts(100, 0);
    for (Eigen::Index i = 0; i < p.cols(); ++i) ++counts[lat.index(cell_of(p.col(i), lat))];
    for (int c : counts) {
      inside += std::abs(c - 1000) <= 3 * std::sqrt(1000.0);
      ++total;
    }
  }
  CHECK(static_cast<double>(inside) / total >= 0.99);
}

TEST_CASE("cell directory buckets ids in ascending order") {
  Rng rng(3);
  const Positions p = place_nodes(500, rng);
  std::vector<NodeId> ids;
  for (NodeId i = 0; i < 500; i += 2) ids.push_back(i);
  const Lattice lat(4, 500);
  const CellDirectory dir(lat, p, ids);
  std::size_t total = 0;
  for (std::size_t c = 0; c < dir.cell_count(); ++c) {
    total += dir.count(c);
    for (const NodeId* it = dir.begin(c); it != dir.end(c); ++it) {
      CHECK(lat.index(cell_of(p.col(*it), lat)) == c);
      if (it + 1 != dir.end(c)) CHECK(*it < *(it + 1));
    }
  }
  CHECK(total == ids.size());
}
