#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "capscale/geometry.hpp"
#include "capscale/routing.hpp"
#include "capscale/traffic.hpp"

namespace capscale {

inline constexpr int kSlots = 9;

struct Reception {
  NodeId tx = 0;
  NodeId rx = 0;
  std::uint32_t stream = 0;
  Leg leg = Leg::kVertical;
  bool degraded = false;
};

/// Nine-slot TDMA frame. Each wireless hop is queued in the cell of its
/// receiver; the cell's sub-lattice picks the slot. Within a slot, step k
/// activates the k-th queued reception of every cell that still has one.
struct Frame {
  Lattice lattice{1, 2.0};
  std::vector<std::vector<Reception>> queues;          // per cell index
  std::array<std::vector<std::uint32_t>, kSlots> cells;  // non-empty cells per slot, ascending

  /// Steps needed to drain the slot: its longest queue.
  std::size_t steps(int slot) const;
  std::size_t size() const;
};

/// Queue order inside a cell is round-robin over streams: the first
/// reception of every stream (in route order), then the second, and so on.
Frame build_frame(std::span<const Route> routes, const Lattice& lat, const NetworkInstance& inst);

struct TransmissionRecord {
  NodeId tx = 0;
  NodeId rx = 0;
  std::uint32_t stream = 0;
  int slot = 0;
  std::uint32_t step = 0;
  double gamma = 0.0;
  double interference = 0.0;
  double rate = 0.0;
  bool success = false;
  bool degraded = false;
};

/// One activation instant. Every transmitter active in the step radiates at
/// P0; the set is de-duplicated, and a receiver never interferes with itself.
std::vector<TransmissionRecord> simulate_step(const Frame& frame, int slot, std::size_t step,
                                              const NetworkInstance& inst, double gamma_floor);

/// Runs every slot until its longest queue drains. Failures are recorded,
/// never retried.
std::vector<TransmissionRecord> simulate_frame(const Frame& frame, const NetworkInstance& inst);

struct FloorStats {
  std::size_t clean = 0;        // non-degraded receptions
  std::size_t clean_above = 0;  // ... with gamma >= floor
  std::size_t degraded = 0;
  std::size_t degraded_above = 0;

  /// Fraction of clean receptions at or above the floor; 1 when none.
  double fraction() const {
    return clean ? static_cast<double>(clean_above) / static_cast<double>(clean) : 1.0;
  }
};

FloorStats floor_stats(std::span<const TransmissionRecord> records, double gamma_floor);

// ---------------------------------------------------------------------------
// Throughput accounting. Formula mode uses the analytic route ceilings;
// measured mode uses the realized cell loads of the instance's routes.

enum class ThroughputMode { kFormula, kMeasured };

struct Throughput {
  double rate = 0.0;        // f_R(gamma_min)
  double divisor = 0.0;     // time-sharing factor
  double per_stream = 0.0;  // rate / divisor
  double streams = 0.0;
  double aggregate = 0.0;   // streams * per_stream
};

/// `load` may be supplied in measured mode to avoid re-routing.
Throughput throughput_asymmetric(const NetworkInstance& inst, ThroughputMode mode,
                                 const CellLoad* load = nullptr);
Throughput throughput_multicast(const NetworkInstance& inst, ThroughputMode mode,
                                const CellLoad* load = nullptr);
Throughput throughput_cluster(const NetworkInstance& inst, ThroughputMode mode,
                              const CellLoad* load = nullptr);

struct HybridThroughput {
  double infrastructure = 0.0;
  double adhoc = 0.0;
  double best = 0.0;
  HybridMode best_mode = HybridMode::kAdhoc;
};

/// Infrastructure: half the cluster aggregate with access points as heads.
/// Ad hoc: n times the pure ad hoc per-node rate (formula), or the measured
/// L-route scheme over wireless nodes only.
HybridThroughput throughput_hybrid(const NetworkInstance& inst,
                                   ThroughputMode mode = ThroughputMode::kFormula);

/// Formula-mode hybrid throughput from (n, d) alone, for sizes too large to
/// instantiate.
HybridThroughput hybrid_formula(double n, double d, const ChannelParams& params,
                                const FadingModel& fading);

Throughput throughput(const NetworkInstance& inst, ThroughputMode mode,
                      const CellLoad* load = nullptr);

}  // namespace capscale
