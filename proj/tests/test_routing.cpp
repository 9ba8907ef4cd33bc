#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "capscale/routing.hpp"

using namespace capscale;

namespace {

// One source per cell at its center, plus extra nodes placed by the caller.
NetworkInstance grid_instance(const Lattice& lat, std::vector<Point> extra, const FadingModel& f,
                              std::uint64_t seed = 1) {
  NetworkInstance inst;
  inst.model = TrafficModel::kAsymmetric;
  inst.d = 0.25;
  const int g = lat.cell_count();
  inst.n = static_cast<std::size_t>(g) + extra.size();
  inst.m = 0;
  inst.positions.resize(2, static_cast<Eigen::Index>(inst.n));
  for (int c = 0; c < g; ++c) inst.positions.col(c) = lat.center(lat.coord(static_cast<std::size_t>(c)));
  for (std::size_t k = 0; k < extra.size(); ++k) inst.positions.col(g + static_cast<Eigen::Index>(k)) = extra[k];
  inst.roles.assign(inst.n, Role::kSource);
  inst.fading = PairFading(seed, f);
  return inst;
}

std::vector<NodeId> all_ids(const NetworkInstance& inst) {
  std::vector<NodeId> v(inst.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<NodeId>(i);
  return v;
}

bool adjacent(const CellCoord& a, const CellCoord& b) {
  return std::abs(a.v1 - b.v1) + std::abs(a.v2 - b.v2) == 1;
}

}  // namespace

TEST_CASE("L-route across a populated lattice") {
  const Lattice lat(10, 8103);
  const Point src = lat.center({3, 1}) + Point(0.01, 0.01);
  const Point dst = lat.center({7, 9}) + Point(0.01, 0.01);
  const auto inst = grid_instance(lat, {src, dst}, FadingModel::trivial());
  Router router(inst, lat, all_ids(inst));
  const NodeId s = 100, t = 101;
  const Route r = router.l_route(s, t, 0);
  REQUIRE(r.cells_crossed.size() == 13);
  for (int k = 0; k <= 8; ++k) CHECK(r.cells_crossed[static_cast<std::size_t>(k)] == CellCoord{3, 1 + k});
  for (int k = 1; k <= 4; ++k) CHECK(r.cells_crossed[static_cast<std::size_t>(8 + k)] == CellCoord{3 + k, 9});
  REQUIRE(r.hops.size() == 13);
  CHECK(r.hops.front().tx == s);
  CHECK(r.hops.back().rx == t);
  CHECK(r.hops.back().leg == Leg::kInCellFinal);
  for (std::size_t k = 0; k + 1 < r.hops.size(); ++k) {
    CHECK(r.hops[k].rx == r.hops[k + 1].tx);
    CHECK(adjacent(router.cell(r.hops[k].tx), router.cell(r.hops[k].rx)));
    CHECK(r.hops[k].leg == (k < 8 ? Leg::kVertical : Leg::kHorizontal));
  }
  CHECK(!r.degraded());
}

TEST_CASE("same-cell route is in-cell delivery only") {
  const Lattice lat(10, 8103);
  const auto inst = grid_instance(lat, {lat.center({2, 2}) + Point(0.02, 0.0), lat.center({2, 2}) - Point(0.02, 0.0)},
                                  FadingModel::trivial());
  Router router(inst, lat, all_ids(inst));
  const Route r = router.l_route(100, 101, 0);
  CHECK(r.cells_crossed.size() == 1);
  REQUIRE(r.hops.size() == 1);
  CHECK(r.hops[0].leg == Leg::kInCellFinal);
  CHECK_THROWS_AS(router.in_cell_delivery(100, 0), std::invalid_argument);
}

TEST_CASE("relay choice: threshold, then largest coefficient, then smallest id") {
  const Lattice lat(4, 100);
  const FadingModel ray = FadingModel::rayleigh();
  std::vector<Point> extra;
  for (int k = 0; k < 6; ++k) extra.push_back(lat.center({2, 1}) + Point(0.01 * k - 0.03, 0.02));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = grid_instance(lat, extra, ray, seed);
    Router router(inst, lat, all_ids(inst));
    const NodeId from = 0;  // center of cell (1,1)
    std::optional<NodeId> expect;
    double best = -1;
    for (NodeId k = 0; k < inst.node_count(); ++k) {
      if (k == from || router.cell(k) != CellCoord{2, 1}) continue;
      const double f = inst.fading(from, k);
      if (f >= ray.f_m && f > best) {
        best = f;
        expect = k;
      }
    }
    CHECK(router.relay_in_cell(from, {2, 1}) == expect);
    if (expect) {
      const NodeId ex[] = {*expect};
      const auto second = router.relay_in_cell(from, {2, 1}, ex);
      if (second) CHECK(inst.fading(from, *second) <= best);
    }
  }
  // An empty cell has no relay.
  const auto sparse = grid_instance(Lattice(1, 3), {}, ray);
  Router r2(sparse, Lattice(4, 100), all_ids(sparse));
  CHECK(!r2.relay_in_cell(0, {4, 4}).has_value());
}

TEST_CASE("in-cell delivery falls back to a two-hop relay") {
  const Lattice lat(2, 10);
  const FadingModel ray = FadingModel::rayleigh();
  std::vector<Point> extra;
  for (int k = 0; k < 5; ++k) extra.push_back(lat.center({1, 1}) + Point(0.02 * k, 0.01));
  bool found = false;
  for (std::uint64_t seed = 1; seed < 500 && !found; ++seed) {
    const auto inst = grid_instance(lat, extra, ray, seed);
    Router router(inst, lat, all_ids(inst));
    const NodeId carrier = 4, dest = 5;
    if (inst.fading(carrier, dest) >= ray.f_m) {
      CHECK(router.in_cell_delivery(carrier, dest).size() == 1);
      continue;
    }
    const auto hops = router.in_cell_delivery(carrier, dest);
    if (hops.size() != 2 || hops[0].degraded) continue;
    found = true;
    CHECK(hops[0].leg == Leg::kInCellRelay);
    CHECK(hops[1].leg == Leg::kInCellFinal);
    CHECK(inst.fading(carrier, hops[0].rx) >= ray.f_m);
    CHECK(inst.fading(hops[0].rx, dest) >= ray.f_m);
  }
  CHECK(found);

  const auto flat = grid_instance(lat, extra, FadingModel::trivial());
  Router router(flat, lat, all_ids(flat));
  CHECK(router.in_cell_delivery(4, 5).size() == 1);
}

TEST_CASE("multicast spacing") {
  CHECK(multicast_spacing(1e4, 0.5) == 1);
  CHECK(multicast_spacing(1e6, 0.2) == 23);
  CHECK_THROWS_AS(multicast_spacing(2, 0.5), std::invalid_argument);
}

TEST_CASE("multicast trees are trees that reach every destination") {
  for (const FadingModel& f : {FadingModel::trivial(), FadingModel::rayleigh()}) {
    const auto inst = gen_multicast(3000, 0.4, 5, ChannelParams{}, f);
    const RoutingPlan plan = route_instance(inst);
    REQUIRE(plan.trees.size() == inst.n);
    for (std::size_t k = 0; k < 50; ++k) {
      const MulticastTree& t = plan.trees[k];
      std::set<NodeId> reached{t.source};
      std::set<NodeId> received;
      for (const Hop& h : t.route.hops) {
        CHECK(reached.count(h.tx));  // edges extend the tree
        CHECK(received.insert(h.rx).second);  // each node receives once
        CHECK(h.rx != t.source);
        reached.insert(h.rx);
      }
      for (NodeId dst : inst.demands[k].destinations) CHECK(reached.count(dst));
      std::set<CellCoord> cells(t.route.cells_crossed.begin(), t.route.cells_crossed.end());
      CHECK(cells.size() == t.route.cells_crossed.size());
    }
  }
}

TEST_CASE("multicast degenerate spacing uses one column") {
  const auto inst = gen_multicast(2000, 0.3, 2, ChannelParams{}, FadingModel::trivial());
  const Lattice lat = build_lattice(2000);
  std::vector<NodeId> ids(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) ids[i] = static_cast<NodeId>(i);
  Router router(inst, lat, ids);
  const Demand& dm = inst.demands[0];
  const MulticastTree t = router.multicast_tree(dm.source, dm.destinations, dm.stream, lat.r());
  CHECK(t.column_legs.size() == 1);
  CHECK(t.column_legs[0] == router.cell(dm.source).v1);
  // A destination inside the leg-2 column needs no leg-3 hop.
  for (std::size_t k = 0; k < dm.destinations.size(); ++k) {
    if (router.cell(dm.destinations[k]).v1 == t.column_legs[0]) CHECK(t.attachment[k].v1 == t.column_legs[0]);
  }
}

TEST_CASE("cluster attachment") {
  NetworkInstance inst;
  inst.model = TrafficModel::kCluster;
  inst.n = 2;
  inst.m = 2;
  inst.positions.resize(2, 4);
  inst.positions.col(0) = Point(-0.3, -0.3);
  inst.positions.col(1) = Point(0.3, 0.3);
  inst.positions.col(2) = Point(-0.2, -0.3);
  inst.positions.col(3) = Point(-0.2, -0.1);
  inst.roles = {Role::kClient, Role::kClient, Role::kClusterHead, Role::kClusterHead};
  inst.fading = PairFading(1, FadingModel::trivial());
  const Lattice lat(2, 2);
  const CellDirectory heads(lat, inst.positions, {2, 3});
  const AttachResult a = cluster_attach(0, inst, lat, heads);
  CHECK((a.head == 2 || a.head == 3));
  CHECK(a.head == 2);  // equal coefficients: smallest id
  CHECK(!a.degraded);
  const AttachResult b = cluster_attach(1, inst, lat, heads);
  CHECK(b.degraded);
  CHECK(!b.head_in_cell);
  CHECK(b.head == 3);  // nearest head

  // Rayleigh: oracle picks the larger coefficient among the cell's heads.
  for (std::uint64_t s = 1; s < 30; ++s) {
    inst.fading = PairFading(s, FadingModel::rayleigh());
    const AttachResult r = cluster_attach(0, inst, lat, heads);
    const NodeId expect = inst.fading(0, 2) >= inst.fading(0, 3) ? 2 : 3;
    CHECK(r.head == expect);
    CHECK(r.degraded == (inst.fading(0, expect) < FadingModel::rayleigh().f_m));
  }
}

TEST_CASE("hybrid routes") {
  const auto inst = gen_hybrid(2000, 0.6, 3, ChannelParams{}, FadingModel::trivial());
  const Route infra = hybrid_route(0, inst.demands[0].destinations[0], 0, inst, HybridMode::kInfrastructure);
  REQUIRE(infra.hops.size() >= 2);
  CHECK(infra.hops.front().leg == Leg::kAccess);
  CHECK(infra.hops.back().leg == Leg::kAccess);
  CHECK(inst.is_secondary(infra.hops.front().rx));
  if (infra.hops.size() == 3) CHECK(!infra.hops[1].wireless());

  const Route adhoc = hybrid_route(0, inst.demands[0].destinations[0], 0, inst, HybridMode::kAdhoc);
  for (const Hop& h : adhoc.hops) {
    CHECK(!inst.is_secondary(h.tx));
    CHECK(!inst.is_secondary(h.rx));
  }
  CHECK_THROWS_AS(hybrid_route(0, 1, 0, gen_cluster(50, 0.5, 1, ChannelParams{}, FadingModel::trivial()),
                               HybridMode::kAdhoc),
                  std::invalid_argument);
}

TEST_CASE("cell loads") {
  const Lattice lat(10, 8103);
  const auto inst = grid_instance(lat, {lat.center({3, 1}), lat.center({7, 9}), lat.center({3, 5})},
                                  FadingModel::trivial());
  Router router(inst, lat, all_ids(inst));
  std::vector<Route> routes{router.l_route(100, 101, 0)};
  CellLoad one = cell_loads(routes, lat, inst);
  CHECK((one.streams.array() == 1).count() == 12);  // source cell has no reception
  routes.push_back(router.l_route(102, 101, 1));
  CellLoad two = cell_loads(routes, lat, inst);
  CHECK(two.streams(static_cast<Eigen::Index>(lat.index({3, 7}))) == 2);
  CHECK(two.max_streams() == 2);
  CHECK(two.primary_per_cell.sum() == static_cast<int>(inst.n));
}

TEST_CASE("asymmetric load decomposition and degraded frequency") {
  for (const FadingModel& f : {FadingModel::trivial(), FadingModel::rayleigh()}) {
    const auto inst = gen_asymmetric(100000, 0.75, 21, ChannelParams{}, f);
    const RoutingPlan plan = route_instance(inst);
    std::size_t hops = 0, degraded = 0;
    for (const Route& r : plan.routes)
      for (const Hop& h : r.hops) {
        ++hops;
        degraded += h.degraded;
      }
    CHECK(static_cast<double>(degraded) / hops < 0.01);

    const Lattice& lat = plan.lattice;
    const CellLoad load = cell_loads(plan.routes, lat, inst);
    std::vector<int> by_col(static_cast<std::size_t>(lat.r()), 0), by_row(static_cast<std::size_t>(lat.r()), 0);
    for (const Demand& dm : inst.demands) {
      ++by_col[static_cast<std::size_t>(cell_of(inst.positions.col(dm.source), lat).v1 - 1)];
      ++by_row[static_cast<std::size_t>(cell_of(inst.positions.col(dm.destinations[0]), lat).v2 - 1)];
    }
    for (int c = 0; c < lat.cell_count(); ++c) {
      const CellCoord cc = lat.coord(static_cast<std::size_t>(c));
      CHECK(load.streams(c) <= by_col[static_cast<std::size_t>(cc.v1 - 1)] + by_row[static_cast<std::size_t>(cc.v2 - 1)]);
    }
  }
}
