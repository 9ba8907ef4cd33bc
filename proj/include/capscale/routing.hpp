#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "capscale/geometry.hpp"
#include "capscale/traffic.hpp"

namespace capscale {

enum class Leg : std::uint8_t {
  kVertical,
  kHorizontal,
  kInCellRelay,
  kInCellFinal,
  kTreeRow,     // multicast leg 1
  kTreeColumn,  // multicast leg 2
  kTreeBranch,  // multicast leg 3
  kAccess,      // client/head or wireless/access-point link
  kBackhaul,    // wired access-point link, no wireless reception
};

std::string_view to_string(Leg leg);

struct Hop {
  NodeId tx = 0;
  NodeId rx = 0;
  Leg leg = Leg::kVertical;
  bool degraded = false;  // f < f_m, or a cell had to be skipped

  bool wireless() const { return leg != Leg::kBackhaul; }
};

struct Route {
  std::uint32_t stream = 0;
  std::vector<Hop> hops;
  std::vector<CellCoord> cells_crossed;

  bool degraded() const;
};

/// Three-leg multicast tree. `route.hops` holds the tree edges; every node
/// other than the source is the receiver of exactly one edge.
struct MulticastTree {
  Route route;
  NodeId source = 0;
  int spacing = 1;
  std::vector<int> column_legs;
  std::vector<CellCoord> attachment;  // per destination, the leg-2 cell its branch starts from
};

struct AttachResult {
  NodeId head = 0;
  bool degraded = false;
  bool head_in_cell = true;
};

enum class HybridMode { kInfrastructure, kAdhoc };

/// Per-cell traffic accounting over a set of routes. Receptions are charged
/// to the receiver's cell; backhaul edges are free.
struct CellLoad {
  Eigen::VectorXi streams;             // r_j: distinct streams with a reception in the cell
  Eigen::VectorXi receptions;          // total receptions in the cell
  Eigen::VectorXi vertical_streams;    // streams received in the cell on a vertical leg
  Eigen::VectorXi horizontal_streams;  // streams received in the cell on a horizontal leg
  Eigen::VectorXi primary_per_cell;    // s_j
  Eigen::VectorXi secondary_per_cell;  // destinations / heads / access points per cell
  Eigen::VectorXi column_primary;      // M per column (index v1-1)
  Eigen::VectorXi row_secondary;       // N per row (index v2-1)

  int max_streams() const { return streams.size() ? streams.maxCoeff() : 0; }
  int max_receptions() const { return receptions.size() ? receptions.maxCoeff() : 0; }
};

/// Route construction over one instance and one lattice. Relays are drawn
/// from `relays` (ids eligible to forward). Results of relay selection into
/// a neighboring cell are memoized per (node, direction), so routes that
/// meet at a node continue identically.
class Router {
 public:
  Router(const NetworkInstance& inst, const Lattice& lat, std::vector<NodeId> relays);

  const Lattice& lattice() const { return lat_; }
  CellCoord cell(NodeId id) const { return lat_.coord(node_cell_[id]); }

  /// Eligible relay in `cell` with f(from, .) >= f_m, largest coefficient
  /// first, then smallest id. nullopt when none qualifies.
  std::optional<NodeId> relay_in_cell(NodeId from, const CellCoord& cell,
                                      std::span<const NodeId> exclude = {}) const;

  /// One or two hops from `carrier` to `dest` inside their common cell.
  /// Throws std::invalid_argument if the two are in different cells.
  std::vector<Hop> in_cell_delivery(NodeId carrier, NodeId dest) const;

  /// Vertical leg along the source column, then horizontal leg along the
  /// destination row, then in-cell delivery.
  Route l_route(NodeId src, NodeId dst, std::uint32_t stream);

  MulticastTree multicast_tree(NodeId src, std::span<const NodeId> dests, std::uint32_t stream,
                               int spacing);

 private:
  struct Pick {
    std::optional<NodeId> node;
    bool degraded = false;
  };
  Pick pick_relay(NodeId from, const CellCoord& cell);
  Pick best_in_cell(NodeId from, std::size_t cell) const;

  const NetworkInstance& inst_;
  Lattice lat_;
  CellDirectory relays_;
  std::vector<std::uint32_t> node_cell_;
  std::vector<std::uint64_t> memo_;  // 4 per node
  double f_m_;

  static constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
  std::uint32_t tree_stamp_ = 0;
  std::vector<std::uint32_t> cell_stamp_;
  std::vector<NodeId> holder_;
  std::vector<NodeId> effective_;
  std::vector<std::uint32_t> reached_stamp_;
};

/// Multicast leg-2 spacing in cells: max(1, round(n^((1-d)/2) / (3 sqrt(ln n)))).
int multicast_spacing(double n, double d);

/// Head in the client's cell with f >= f_m (largest coefficient, then
/// smallest id). Falls back to the best head in the cell, then to the
/// nearest head anywhere; both fallbacks are flagged degraded.
AttachResult cluster_attach(NodeId client, const NetworkInstance& inst, const Lattice& lat,
                            const CellDirectory& heads);

/// Lattice used by each model's scheme: n / (9 ln n) cells for multihop
/// schemes, m / (9 ln n) cells for single-hop access schemes.
Lattice scheme_lattice(const NetworkInstance& inst, HybridMode mode = HybridMode::kAdhoc);

struct RoutingPlan {
  Lattice lattice{1, 2.0};
  std::vector<Route> routes;
  std::vector<MulticastTree> trees;  // multicast only; routes mirror tree edges
};

/// Routes every demand of the instance with the model's scheme.
RoutingPlan route_instance(const NetworkInstance& inst, HybridMode mode = HybridMode::kAdhoc);

Route hybrid_route(NodeId src, NodeId dst, std::uint32_t stream, const NetworkInstance& inst,
                   HybridMode mode);

CellLoad cell_loads(std::span<const Route> routes, const Lattice& lat, const NetworkInstance& inst);

}  // namespace capscale
