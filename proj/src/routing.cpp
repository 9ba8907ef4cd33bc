#include "capscale/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace capscale {

std::string_view to_string(Leg leg) {
  switch (leg) {
    case Leg::kVertical: return "vertical";
    case Leg::kHorizontal: return "horizontal";
    case Leg::kInCellRelay: return "in-cell-relay";
    case Leg::kInCellFinal: return "in-cell-final";
    case Leg::kTreeRow: return "leg1";
    case Leg::kTreeColumn: return "leg2";
    case Leg::kTreeBranch: return "leg3";
    case Leg::kAccess: return "access";
    case Leg::kBackhaul: return "backhaul";
  }
  return "?";
}

bool Route::degraded() const {
  return std::any_of(hops.begin(), hops.end(), [](const Hop& h) { return h.degraded; });
}

namespace {

constexpr std::uint64_t kMemoSet = 1ULL << 63;
constexpr std::uint64_t kMemoDegraded = 1ULL << 62;
constexpr std::uint64_t kMemoHasNode = 1ULL << 61;

int direction(const CellCoord& from, const CellCoord& to) {
  if (to.v2 == from.v2) {
    if (to.v1 == from.v1 - 1) return 0;
    if (to.v1 == from.v1 + 1) return 1;
  } else if (to.v1 == from.v1) {
    if (to.v2 == from.v2 - 1) return 2;
    if (to.v2 == from.v2 + 1) return 3;
  }
  return -1;
}

// Cells from `a` to `b` (inclusive) along the column of `a`, then the row of `b`.
std::vector<CellCoord> l_path(const CellCoord& a, const CellCoord& b) {
  std::vector<CellCoord> path;
  path.reserve(std::abs(a.v2 - b.v2) + std::abs(a.v1 - b.v1) + 1);
  CellCoord c = a;
  path.push_back(c);
  const int dy = b.v2 > a.v2 ? 1 : -1;
  while (c.v2 != b.v2) {
    c.v2 += dy;
    path.push_back(c);
  }
  const int dx = b.v1 > a.v1 ? 1 : -1;
  while (c.v1 != b.v1) {
    c.v1 += dx;
    path.push_back(c);
  }
  return path;
}

}  // namespace

Router::Router(const NetworkInstance& inst, const Lattice& lat, std::vector<NodeId> relays)
    : inst_(inst),
      lat_(lat),
      relays_(lat, inst.positions, relays),
      node_cell_(inst.node_count()),
      memo_(4 * inst.node_count(), 0),
      f_m_(inst.fading.model().f_m) {
  for (std::size_t i = 0; i < inst.node_count(); ++i) {
    node_cell_[i] = static_cast<std::uint32_t>(
        lat_.index(cell_of(inst.positions.col(static_cast<Eigen::Index>(i)), lat_)));
  }
}

std::optional<NodeId> Router::relay_in_cell(NodeId from, const CellCoord& cell,
                                            std::span<const NodeId> exclude) const {
  if (!lat_.contains(cell)) throw std::invalid_argument("relay_in_cell: cell outside lattice");
  const std::size_t c = lat_.index(cell);
  std::optional<NodeId> best;
  double best_f = -1.0;
  for (const NodeId* it = relays_.begin(c); it != relays_.end(c); ++it) {
    const NodeId k = *it;
    if (k == from || std::find(exclude.begin(), exclude.end(), k) != exclude.end()) continue;
    const double f = inst_.fading(from, k);
    if (f >= f_m_ && f > best_f) {
      best = k;
      best_f = f;
    }
  }
  return best;
}

Router::Pick Router::best_in_cell(NodeId from, std::size_t c) const {
  Pick pick;
  double best_f = -1.0;
  for (const NodeId* it = relays_.begin(c); it != relays_.end(c); ++it) {
    if (*it == from) continue;
    const double f = inst_.fading(from, *it);
    if (f > best_f) {
      pick.node = *it;
      best_f = f;
    }
  }
  pick.degraded = pick.node.has_value() && best_f < f_m_;
  return pick;
}

Router::Pick Router::pick_relay(NodeId from, const CellCoord& cell) {
  const std::size_t target = lat_.index(cell);
  const int dir = direction(lat_.coord(node_cell_[from]), cell);
  if (dir < 0) {
    Pick p = best_in_cell(from, target);
    p.degraded = true;  // not a neighboring cell
    return p;
  }
  std::uint64_t& slot = memo_[4 * static_cast<std::size_t>(from) + dir];
  if (slot & kMemoSet) {
    Pick p;
    if (slot & kMemoHasNode) p.node = static_cast<NodeId>(slot & 0xffffffffULL);
    p.degraded = (slot & kMemoDegraded) != 0;
    return p;
  }
  const Pick p = best_in_cell(from, target);
  slot = kMemoSet | (p.degraded ? kMemoDegraded : 0) |
         (p.node ? (kMemoHasNode | *p.node) : 0);
  return p;
}

std::vector<Hop> Router::in_cell_delivery(NodeId carrier, NodeId dest) const {
  const std::size_t c = node_cell_[carrier];
  if (c != node_cell_[dest]) {
    throw std::invalid_argument("in_cell_delivery: carrier and destination in different cells");
  }
  if (carrier == dest) return {};
  if (inst_.fading(carrier, dest) >= f_m_) {
    return {{carrier, dest, Leg::kInCellFinal, false}};
  }
  // First relay (by id) meeting the median on both links; otherwise the one
  // with the best weaker link, flagged.
  std::optional<NodeId> fallback;
  double fallback_f = -1.0;
  for (const NodeId* it = relays_.begin(c); it != relays_.end(c); ++it) {
    const NodeId k = *it;
    if (k == carrier || k == dest) continue;
    const double weaker = std::min(inst_.fading(carrier, k), inst_.fading(k, dest));
    if (weaker >= f_m_) {
      return {{carrier, k, Leg::kInCellRelay, false}, {k, dest, Leg::kInCellFinal, false}};
    }
    if (weaker > fallback_f) {
      fallback = k;
      fallback_f = weaker;
    }
  }
  if (!fallback) return {{carrier, dest, Leg::kInCellFinal, true}};
  return {{carrier, *fallback, Leg::kInCellRelay, true}, {*fallback, dest, Leg::kInCellFinal, true}};
}

Route Router::l_route(NodeId src, NodeId dst, std::uint32_t stream) {
  Route route;
  route.stream = stream;
  const CellCoord cs = cell(src);
  const CellCoord cd = cell(dst);
  route.cells_crossed = l_path(cs, cd);

  NodeId carrier = src;
  bool skipped = false;
  for (std::size_t t = 1; t < route.cells_crossed.size(); ++t) {
    const CellCoord& next = route.cells_crossed[t];
    const Leg leg = next.v1 == cs.v1 ? Leg::kVertical : Leg::kHorizontal;
    const Pick p = pick_relay(carrier, next);
    if (!p.node) {
      skipped = true;
      continue;
    }
    route.hops.push_back({carrier, *p.node, leg, p.degraded || skipped});
    carrier = *p.node;
    skipped = false;
  }
  if (node_cell_[carrier] == node_cell_[dst]) {
    for (const Hop& h : in_cell_delivery(carrier, dst)) route.hops.push_back(h);
  } else {
    route.hops.push_back({carrier, dst, Leg::kInCellFinal, true});
  }
  return route;
}

MulticastTree Router::multicast_tree(NodeId src, std::span<const NodeId> dests,
                                     std::uint32_t stream, int spacing) {
  if (spacing < 1) throw std::invalid_argument("multicast_tree: spacing must be >= 1");
  const int r = lat_.r();
  const std::size_t g = static_cast<std::size_t>(lat_.cell_count());

  MulticastTree tree;
  tree.source = src;
  tree.spacing = spacing;
  tree.route.stream = stream;

  // holder: a node in the cell that has the packet. effective: the node line
  // propagation continues from (the holder, or the last carrier when the cell
  // had no relay). Scratch arrays are reused across trees via stamps.
  const std::uint32_t stamp = ++tree_stamp_;
  if (cell_stamp_.size() != g) {
    cell_stamp_.assign(g, 0);
    holder_.assign(g, kNoNode);
    effective_.assign(g, kNoNode);
  }
  if (reached_stamp_.size() != inst_.node_count()) reached_stamp_.assign(inst_.node_count(), 0);

  auto touch = [&](const CellCoord& c) {
    const std::size_t i = lat_.index(c);
    if (cell_stamp_[i] != stamp) {
      cell_stamp_[i] = stamp;
      holder_[i] = kNoNode;
      effective_[i] = kNoNode;
      tree.route.cells_crossed.push_back(c);
    }
    return i;
  };
  auto is_reached = [&](NodeId v) { return reached_stamp_[v] == stamp; };
  auto mark = [&](NodeId v) {
    reached_stamp_[v] = stamp;
    const std::size_t i = touch(lat_.coord(node_cell_[v]));
    if (holder_[i] == kNoNode) holder_[i] = v;
  };
  auto add_edge = [&](const Hop& h) {
    tree.route.hops.push_back(h);
    mark(h.rx);
  };

  const CellCoord cs = cell(src);
  mark(src);
  effective_[lat_.index(cs)] = src;

  // Walks `cells` in order; `carrier` serves the cell before the first one.
  auto propagate = [&](NodeId carrier, CellCoord from, int dv1, int dv2, int steps, Leg leg) {
    bool skipped = false;
    for (int k = 0; k < steps; ++k) {
      from.v1 += dv1;
      from.v2 += dv2;
      const std::size_t i = touch(from);
      if (holder_[i] != kNoNode) {
        carrier = holder_[i];
        skipped = false;
      } else if (const Pick p = pick_relay(carrier, from); p.node) {
        add_edge({carrier, *p.node, leg, p.degraded || skipped});
        carrier = *p.node;
        skipped = false;
      } else {
        skipped = true;
      }
      if (effective_[i] == kNoNode) effective_[i] = carrier;
    }
  };

  // Leg 1: the source row, both directions.
  propagate(src, cs, -1, 0, cs.v1 - 1, Leg::kTreeRow);
  propagate(src, cs, +1, 0, r - cs.v1, Leg::kTreeRow);

  // Leg 2: full columns every `spacing` cells from the source column.
  for (int c = cs.v1 - ((cs.v1 - 1) / spacing) * spacing; c <= r; c += spacing) {
    tree.column_legs.push_back(c);
    const CellCoord base{c, cs.v2};
    const NodeId start = effective_[lat_.index(base)];
    propagate(start, base, 0, +1, r - cs.v2, Leg::kTreeColumn);
    propagate(start, base, 0, -1, cs.v2 - 1, Leg::kTreeColumn);
  }

  // Leg 3: from the nearest leg-2 column (ties to the smaller index) along
  // the destination row, then in-cell delivery.
  for (const NodeId dst : dests) {
    const CellCoord cd = cell(dst);
    const int offset = cd.v1 - cs.v1;
    const int below =
        cs.v1 + static_cast<int>(std::floor(static_cast<double>(offset) / spacing)) * spacing;
    const int above = below + spacing;
    int col = below;
    if (below < 1 || (above <= r && above - cd.v1 < cd.v1 - below)) col = above;
    const CellCoord attach{col, cd.v2};
    tree.attachment.push_back(attach);
    propagate(effective_[lat_.index(attach)], attach, cd.v1 > col ? 1 : -1, 0,
              std::abs(cd.v1 - col), Leg::kTreeBranch);

    if (is_reached(dst)) continue;
    const NodeId carrier = effective_[lat_.index(cd)];
    if (node_cell_[carrier] != node_cell_[dst]) {
      add_edge({carrier, dst, Leg::kInCellFinal, true});
      continue;
    }
    for (const Hop& h : in_cell_delivery(carrier, dst)) {
      if (!is_reached(h.rx)) add_edge(h);
    }
  }
  return tree;
}

int multicast_spacing(double n, double d) {
  if (!(n >= 3.0)) throw std::invalid_argument("multicast_spacing: n must be >= 3");
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("multicast_spacing: d must lie in (0,1)");
  const double h = std::pow(n, (1.0 - d) / 2.0) / (3.0 * std::sqrt(std::log(n)));
  return std::max(1, static_cast<int>(std::round(h)));
}

AttachResult cluster_attach(NodeId client, const NetworkInstance& inst, const Lattice& lat,
                            const CellDirectory& heads) {
  const std::size_t c = lat.index(cell_of(inst.positions.col(client), lat));
  const double f_m = inst.fading.model().f_m;
  AttachResult out;
  double best_f = -1.0;
  bool found = false;
  for (const NodeId* it = heads.begin(c); it != heads.end(c); ++it) {
    const double f = inst.fading(client, *it);
    if (f > best_f) {
      out.head = *it;
      best_f = f;
      found = true;
    }
  }
  if (found) {
    out.degraded = best_f < f_m;
    return out;
  }
  // No head in the cell: nearest head overall.
  out.degraded = true;
  out.head_in_cell = false;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < heads.cell_count(); ++cell) {
    for (const NodeId* it = heads.begin(cell); it != heads.end(cell); ++it) {
      const double dd = (inst.positions.col(*it) - inst.positions.col(client)).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        out.head = *it;
        found = true;
      }
    }
  }
  if (!found) throw std::invalid_argument("cluster_attach: instance has no heads");
  return out;
}

Lattice scheme_lattice(const NetworkInstance& inst, HybridMode mode) {
  const double n = static_cast<double>(inst.n);
  const bool access_scheme = inst.model == TrafficModel::kCluster ||
                             (inst.model == TrafficModel::kHybrid && mode == HybridMode::kInfrastructure);
  if (access_scheme) {
    const double ln_n = n > 1.0 ? std::log(n) : 1.0;
    return lattice_with_cells(static_cast<double>(inst.m) / (9.0 * ln_n), n);
  }
  return build_lattice(n);
}

namespace {

std::vector<NodeId> primary_nodes(const NetworkInstance& inst) {
  std::vector<NodeId> out(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) out[i] = static_cast<NodeId>(i);
  return out;
}

std::vector<NodeId> secondary_nodes(const NetworkInstance& inst) {
  std::vector<NodeId> out;
  for (std::size_t i = inst.n; i < inst.node_count(); ++i) out.push_back(static_cast<NodeId>(i));
  return out;
}

Route access_route(std::uint32_t stream, NodeId from, NodeId to, bool degraded,
                   const Lattice& lat, const NetworkInstance& inst) {
  Route r;
  r.stream = stream;
  r.hops.push_back({from, to, Leg::kAccess, degraded});
  r.cells_crossed.push_back(cell_of(inst.positions.col(from), lat));
  const CellCoord other = cell_of(inst.positions.col(to), lat);
  if (other != r.cells_crossed.front()) r.cells_crossed.push_back(other);
  return r;
}

Route infrastructure_route(NodeId src, NodeId dst, std::uint32_t stream,
                           const NetworkInstance& inst, const Lattice& lat,
                           const CellDirectory& aps) {
  const AttachResult up = cluster_attach(src, inst, lat, aps);
  const AttachResult down = cluster_attach(dst, inst, lat, aps);
  Route r;
  r.stream = stream;
  r.hops.push_back({src, up.head, Leg::kAccess, up.degraded});
  if (up.head != down.head) r.hops.push_back({up.head, down.head, Leg::kBackhaul, false});
  r.hops.push_back({down.head, dst, Leg::kAccess, down.degraded});
  r.cells_crossed.push_back(cell_of(inst.positions.col(src), lat));
  const CellCoord cd = cell_of(inst.positions.col(dst), lat);
  if (cd != r.cells_crossed.front()) r.cells_crossed.push_back(cd);
  return r;
}

}  // namespace

Route hybrid_route(NodeId src, NodeId dst, std::uint32_t stream, const NetworkInstance& inst,
                   HybridMode mode) {
  if (inst.model != TrafficModel::kHybrid) throw std::invalid_argument("hybrid_route: not a hybrid instance");
  const Lattice lat = scheme_lattice(inst, mode);
  if (mode == HybridMode::kInfrastructure) {
    const CellDirectory aps(lat, inst.positions, secondary_nodes(inst));
    return infrastructure_route(src, dst, stream, inst, lat, aps);
  }
  Router router(inst, lat, primary_nodes(inst));
  return router.l_route(src, dst, stream);
}

RoutingPlan route_instance(const NetworkInstance& inst, HybridMode mode) {
  RoutingPlan plan;
  plan.lattice = scheme_lattice(inst, mode);
  const Lattice& lat = plan.lattice;
  plan.routes.reserve(inst.demands.size());

  switch (inst.model) {
    case TrafficModel::kAsymmetric: {
      Router router(inst, lat, primary_nodes(inst));
      for (const Demand& dm : inst.demands) {
        plan.routes.push_back(router.l_route(dm.source, dm.destinations.front(), dm.stream));
      }
      break;
    }
    case TrafficModel::kMulticast: {
      Router router(inst, lat, primary_nodes(inst));
      const int h = multicast_spacing(std::max(3.0, static_cast<double>(inst.n)), inst.d);
      plan.trees.reserve(inst.demands.size());
      for (const Demand& dm : inst.demands) {
        plan.trees.push_back(router.multicast_tree(dm.source, dm.destinations, dm.stream, h));
        plan.routes.push_back(plan.trees.back().route);
      }
      break;
    }
    case TrafficModel::kCluster: {
      const CellDirectory heads(lat, inst.positions, secondary_nodes(inst));
      for (const Demand& dm : inst.demands) {
        const bool uplink = dm.source != kAnyHead;
        const NodeId client = uplink ? dm.source : dm.destinations.front();
        const AttachResult a = cluster_attach(client, inst, lat, heads);
        plan.routes.push_back(uplink ? access_route(dm.stream, client, a.head, a.degraded, lat, inst)
                                     : access_route(dm.stream, a.head, client, a.degraded, lat, inst));
      }
      break;
    }
    case TrafficModel::kHybrid: {
      if (mode == HybridMode::kInfrastructure) {
        const CellDirectory aps(lat, inst.positions, secondary_nodes(inst));
        for (const Demand& dm : inst.demands) {
          plan.routes.push_back(
              infrastructure_route(dm.source, dm.destinations.front(), dm.stream, inst, lat, aps));
        }
      } else {
        Router router(inst, lat, primary_nodes(inst));
        for (const Demand& dm : inst.demands) {
          plan.routes.push_back(router.l_route(dm.source, dm.destinations.front(), dm.stream));
        }
      }
      break;
    }
  }
  return plan;
}

CellLoad cell_loads(std::span<const Route> routes, const Lattice& lat, const NetworkInstance& inst) {
  const Eigen::Index g = lat.cell_count();
  const int r = lat.r();
  CellLoad load;
  load.streams = Eigen::VectorXi::Zero(g);
  load.receptions = Eigen::VectorXi::Zero(g);
  load.vertical_streams = Eigen::VectorXi::Zero(g);
  load.horizontal_streams = Eigen::VectorXi::Zero(g);
  load.primary_per_cell = Eigen::VectorXi::Zero(g);
  load.secondary_per_cell = Eigen::VectorXi::Zero(g);
  load.column_primary = Eigen::VectorXi::Zero(r);
  load.row_secondary = Eigen::VectorXi::Zero(r);

  std::vector<std::size_t> node_cell(inst.node_count());
  for (std::size_t i = 0; i < inst.node_count(); ++i) {
    const CellCoord c = cell_of(inst.positions.col(static_cast<Eigen::Index>(i)), lat);
    node_cell[i] = lat.index(c);
    if (i < inst.n) {
      ++load.primary_per_cell(node_cell[i]);
      ++load.column_primary(c.v1 - 1);
    } else {
      ++load.secondary_per_cell(node_cell[i]);
      ++load.row_secondary(c.v2 - 1);
    }
  }

  // Stamps are route index + 1, so each stream counts once per cell.
  std::vector<std::size_t> any(g, 0), vert(g, 0), horiz(g, 0);
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const std::size_t stamp = k + 1;
    for (const Hop& h : routes[k].hops) {
      if (!h.wireless()) continue;
      const std::size_t c = node_cell[h.rx];
      ++load.receptions(static_cast<Eigen::Index>(c));
      if (any[c] != stamp) {
        any[c] = stamp;
        ++load.streams(static_cast<Eigen::Index>(c));
      }
      if (h.leg == Leg::kVertical && vert[c] != stamp) {
        vert[c] = stamp;
        ++load.vertical_streams(static_cast<Eigen::Index>(c));
      }
      if (h.leg == Leg::kHorizontal && horiz[c] != stamp) {
        horiz[c] = stamp;
        ++load.horizontal_streams(static_cast<Eigen::Index>(c));
      }
    }
  }
  return load;
}

}  // namespace capscale
