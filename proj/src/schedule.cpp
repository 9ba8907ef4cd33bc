#include "capscale/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "capscale/bounds.hpp"
#include "capscale/channel.hpp"

namespace capscale {

std::size_t Frame::steps(int slot) const {
  std::size_t s = 0;
  for (const std::uint32_t c : cells.at(static_cast<std::size_t>(slot))) s = std::max(s, queues[c].size());
  return s;
}

std::size_t Frame::size() const {
  std::size_t s = 0;
  for (const auto& q : queues) s += q.size();
  return s;
}

Frame build_frame(std::span<const Route> routes, const Lattice& lat, const NetworkInstance& inst) {
  const std::size_t g = static_cast<std::size_t>(lat.cell_count());
  std::vector<std::uint32_t> node_cell(inst.node_count());
  for (std::size_t i = 0; i < inst.node_count(); ++i) {
    node_cell[i] = static_cast<std::uint32_t>(
        lat.index(cell_of(inst.positions.col(static_cast<Eigen::Index>(i)), lat)));
  }

  // Key (k-th reception of this route in the cell, route index) gives the
  // round-robin order after sorting.
  struct Keyed {
    std::uint64_t key;
    Reception rec;
  };
  std::vector<std::vector<Keyed>> staged(g);
  std::vector<std::size_t> last_route(g, SIZE_MAX);
  std::vector<std::uint32_t> seen(g, 0);
  for (std::size_t k = 0; k < routes.size(); ++k) {
    for (const Hop& h : routes[k].hops) {
      if (!h.wireless()) continue;
      const std::uint32_t c = node_cell[h.rx];
      if (last_route[c] != k) {
        last_route[c] = k;
        seen[c] = 0;
      }
      const std::uint64_t key = (static_cast<std::uint64_t>(seen[c]++) << 32) | k;
      staged[c].push_back({key, {h.tx, h.rx, routes[k].stream, h.leg, h.degraded}});
    }
  }

  Frame frame;
  frame.lattice = lat;
  frame.queues.resize(g);
  for (std::size_t c = 0; c < g; ++c) {
    auto& s = staged[c];
    if (s.empty()) continue;
    std::stable_sort(s.begin(), s.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
    frame.queues[c].reserve(s.size());
    for (const Keyed& e : s) frame.queues[c].push_back(e.rec);
    frame.cells[static_cast<std::size_t>(sublattice_of(lat.coord(c)))].push_back(static_cast<std::uint32_t>(c));
  }
  return frame;
}

std::vector<TransmissionRecord> simulate_step(const Frame& frame, int slot, std::size_t step,
                                              const NetworkInstance& inst, double gamma_floor) {
  if (slot < 0 || slot >= kSlots) throw std::out_of_range("simulate_step: slot out of range");
  const ChannelParams& p = inst.params;
  std::vector<const Reception*> active;
  for (const std::uint32_t c : frame.cells[static_cast<std::size_t>(slot)]) {
    if (step < frame.queues[c].size()) active.push_back(&frame.queues[c][step]);
  }
  std::vector<NodeId> tx;
  tx.reserve(active.size());
  for (const Reception* a : active) tx.push_back(a->tx);
  std::sort(tx.begin(), tx.end());
  tx.erase(std::unique(tx.begin(), tx.end()), tx.end());

  Positions tx_pos(2, static_cast<Eigen::Index>(tx.size()));
  for (std::size_t k = 0; k < tx.size(); ++k) tx_pos.col(static_cast<Eigen::Index>(k)) = inst.positions.col(tx[k]);

  const double r = rate(gamma_floor, p);
  std::vector<TransmissionRecord> out;
  out.reserve(active.size());
  for (const Reception* a : active) {
    const Eigen::Vector2d at = inst.positions.col(a->rx);
    const Eigen::ArrayXd d2 = (tx_pos.colwise() - at).colwise().squaredNorm().transpose().array();
    const Eigen::ArrayXd path = d2.pow(-p.alpha / 2.0);
    double interference = 0.0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
      if (tx[k] == a->tx || tx[k] == a->rx) continue;
      interference += inst.fading(tx[k], a->rx) * path(static_cast<Eigen::Index>(k));
    }
    interference *= p.K * p.P0;
    const double signal =
        p.K * p.P0 * inst.fading(a->tx, a->rx) *
        std::pow((inst.positions.col(a->tx) - at).squaredNorm(), -p.alpha / 2.0);
    TransmissionRecord rec;
    rec.tx = a->tx;
    rec.rx = a->rx;
    rec.stream = a->stream;
    rec.slot = slot;
    rec.step = static_cast<std::uint32_t>(step);
    rec.interference = interference;
    rec.gamma = signal / (p.eta + interference);
    rec.rate = r;
    rec.success = rec.gamma >= gamma_floor;
    rec.degraded = a->degraded;
    out.push_back(rec);
  }
  return out;
}

std::vector<TransmissionRecord> simulate_frame(const Frame& frame, const NetworkInstance& inst) {
  const double floor = gamma_min(std::max(2.0, static_cast<double>(inst.n)), inst.fading.model(), inst.params);
  std::vector<TransmissionRecord> out;
  out.reserve(frame.size());
  for (int s = 0; s < kSlots; ++s) {
    const std::size_t steps = frame.steps(s);
    for (std::size_t k = 0; k < steps; ++k) {
      auto part = simulate_step(frame, s, k, inst, floor);
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

FloorStats floor_stats(std::span<const TransmissionRecord> records, double gamma_floor) {
  FloorStats s;
  for (const TransmissionRecord& r : records) {
    const bool above = r.gamma >= gamma_floor;
    if (r.degraded) {
      ++s.degraded;
      s.degraded_above += above;
    } else {
      ++s.clean;
      s.clean_above += above;
    }
  }
  return s;
}

namespace {

double floor_rate(const NetworkInstance& inst) {
  const double n = std::max(2.0, static_cast<double>(inst.n));
  return rate(gamma_min(n, inst.fading.model(), inst.params), inst.params);
}

Throughput make(double rate, double divisor, double streams) {
  Throughput t;
  t.rate = rate;
  t.divisor = divisor;
  t.per_stream = rate / divisor;
  t.streams = streams;
  t.aggregate = streams * t.per_stream;
  return t;
}

void require(const NetworkInstance& inst, TrafficModel model, const char* who) {
  if (inst.model != model) throw std::invalid_argument(std::string(who) + ": wrong traffic model");
}

CellLoad measured_load(const NetworkInstance& inst, HybridMode mode = HybridMode::kAdhoc) {
  const RoutingPlan plan = route_instance(inst, mode);
  return cell_loads(plan.routes, plan.lattice, inst);
}

}  // namespace

Throughput throughput_asymmetric(const NetworkInstance& inst, ThroughputMode mode,
                                 const CellLoad* load) {
  require(inst, TrafficModel::kAsymmetric, "throughput_asymmetric");
  const double n = static_cast<double>(inst.n);
  if (mode == ThroughputMode::kFormula) return make(floor_rate(inst), 27.0 * lemma7_rmax(n, inst.d), n);
  const CellLoad own = load ? CellLoad{} : measured_load(inst);
  const CellLoad& l = load ? *load : own;
  return make(floor_rate(inst), 9.0 * std::max(1, l.max_receptions()), n);
}

Throughput throughput_multicast(const NetworkInstance& inst, ThroughputMode mode,
                                const CellLoad* load) {
  require(inst, TrafficModel::kMulticast, "throughput_multicast");
  const double n = static_cast<double>(inst.n);
  const double streams = n * static_cast<double>(inst.m);
  if (mode == ThroughputMode::kFormula) return make(floor_rate(inst), 27.0 * eq17_rmax(n, inst.d), streams);
  const CellLoad own = load ? CellLoad{} : measured_load(inst);
  const CellLoad& l = load ? *load : own;
  return make(floor_rate(inst), 9.0 * std::max(1, l.max_receptions()), streams);
}

namespace {

Throughput access_throughput(const NetworkInstance& inst, ThroughputMode mode, const CellLoad* load) {
  const double n = static_cast<double>(inst.n);
  if (mode == ThroughputMode::kFormula) {
    return make(floor_rate(inst), 27.0 * std::pow(n, 1.0 - inst.d) * std::log(n), 2.0 * n);
  }
  const CellLoad own = load ? CellLoad{} : measured_load(inst, HybridMode::kInfrastructure);
  const CellLoad& l = load ? *load : own;
  const int s_max = l.primary_per_cell.size() ? l.primary_per_cell.maxCoeff() : 0;
  return make(floor_rate(inst), 18.0 * std::max(1, s_max), 2.0 * n);
}

}  // namespace

Throughput throughput_cluster(const NetworkInstance& inst, ThroughputMode mode, const CellLoad* load) {
  require(inst, TrafficModel::kCluster, "throughput_cluster");
  return access_throughput(inst, mode, load);
}

namespace {

HybridThroughput pick_best(HybridThroughput h) {
  h.best_mode = h.infrastructure > h.adhoc ? HybridMode::kInfrastructure : HybridMode::kAdhoc;
  h.best = std::max(h.infrastructure, h.adhoc);
  return h;
}

}  // namespace

HybridThroughput hybrid_formula(double n, double d, const ChannelParams& params,
                                const FadingModel& fading) {
  if (!(n >= 3.0)) throw std::invalid_argument("hybrid_formula: n must be >= 3");
  const double fr = rate(gamma_min(n, fading, params), params);
  HybridThroughput h;
  // Half of 2n streams at the cluster per-stream rate.
  h.infrastructure = n * fr / (27.0 * std::pow(n, 1.0 - d) * std::log(n));
  h.adhoc = n * adhoc_per_node(n, params.alpha, params.W, fading.q, fading.f_m, params.Gamma);
  return pick_best(h);
}

HybridThroughput throughput_hybrid(const NetworkInstance& inst, ThroughputMode mode) {
  require(inst, TrafficModel::kHybrid, "throughput_hybrid");
  const double n = static_cast<double>(inst.n);
  if (mode == ThroughputMode::kFormula) return hybrid_formula(n, inst.d, inst.params, inst.fading.model());
  HybridThroughput h;
  h.infrastructure = access_throughput(inst, mode, nullptr).aggregate / 2.0;
  const CellLoad l = measured_load(inst, HybridMode::kAdhoc);
  h.adhoc = make(floor_rate(inst), 9.0 * std::max(1, l.max_receptions()), n).aggregate;
  return pick_best(h);
}

Throughput throughput(const NetworkInstance& inst, ThroughputMode mode, const CellLoad* load) {
  switch (inst.model) {
    case TrafficModel::kAsymmetric: return throughput_asymmetric(inst, mode, load);
    case TrafficModel::kMulticast: return throughput_multicast(inst, mode, load);
    case TrafficModel::kCluster: return throughput_cluster(inst, mode, load);
    case TrafficModel::kHybrid: {
      const HybridThroughput h = throughput_hybrid(inst, mode);
      Throughput t;
      t.rate = floor_rate(inst);
      t.streams = static_cast<double>(inst.n);
      t.aggregate = h.best;
      t.per_stream = h.best / t.streams;
      t.divisor = t.rate / t.per_stream;
      return t;
    }
  }
  throw std::invalid_argument("throughput: unknown model");
}

}  // namespace capscale
