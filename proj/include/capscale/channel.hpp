#pragma once

#include <concepts>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "capscale/geometry.hpp"

namespace capscale {

struct ChannelParams {
  double K = 1.0;        // gain constant
  double alpha = 4.0;    // decay exponent, > 2
  double eta = 1e-6;     // thermal noise power
  double P0 = 1.0;       // transmit power used by every scheme transmission
  double W = 1.0;        // bandwidth (Hz)
  double Gamma = 1.0;    // SINR gap, >= 1

  /// Throws std::invalid_argument when a field is out of its domain.
  void validate() const;
};

enum class FadingKind { kTrivial, kRayleigh, kNakagami, kRicean };

/// Unit-mean power fading law together with its tail constants: for x > x1,
/// P[f > x] <= exp(-q x), and P[f >= f_m] >= 1/2.
///
/// Rayleigh means exponentially distributed power. Nakagami-m is restricted
/// to integer m (power ~ Gamma(m, 1/m)); Ricean takes the K-factor. All four
/// use q = 1; x1 and f_m are solved at construction.
struct FadingModel {
  FadingKind kind = FadingKind::kTrivial;
  double shape = 0.0;  // m for Nakagami, K-factor for Ricean
  double q = 1.0;
  double x1 = 1.0;
  double f_m = 1.0;

  static FadingModel trivial();
  static FadingModel rayleigh();
  static FadingModel nakagami(int m);
  static FadingModel ricean(double k_factor);

  /// Accepts "trivial", "rayleigh" (alias "exponential"), "nakagami-<m>",
  /// "ricean-<K>".
  static FadingModel from_name(std::string_view name);
  std::string name() const;

  /// Draw keyed by a 64-bit counter; equal keys give equal draws.
  double sample(std::uint64_t key) const;

  /// P[f > x].
  double survival(double x) const;
};

inline double model_median(const FadingModel& m) { return m.f_m; }

/// Symmetric pairwise fading generated on demand from (seed, min(i,j), max(i,j)).
class PairFading {
 public:
  PairFading() = default;
  PairFading(std::uint64_t seed, FadingModel model) : seed_(seed), model_(model) {}

  /// Throws std::invalid_argument for i == j.
  double operator()(NodeId i, NodeId j) const;

  std::uint64_t seed() const { return seed_; }
  const FadingModel& model() const { return model_; }

 private:
  std::uint64_t seed_ = 0;
  FadingModel model_ = FadingModel::trivial();
};

inline double fading_sample(const PairFading& pf, NodeId i, NodeId j) { return pf(i, j); }

/// K f d^-alpha. Throws std::domain_error at zero distance.
double gain(const PairFading& pf, const ChannelParams& params, NodeId i, NodeId j,
            const Positions& pos);

/// SINR at `rx` receiving from `tx` while every node in `active` transmits at
/// P0. Requires tx in active and rx not in active.
double sinr(NodeId rx, NodeId tx, std::span<const NodeId> active, const PairFading& pf,
            const ChannelParams& params, const Positions& pos);

/// Summed interference power at `rx` from all `active` transmitters except
/// `tx`. Vectorized over the active set.
double interference_at(NodeId rx, NodeId tx, std::span<const NodeId> active,
                       const PairFading& pf, const ChannelParams& params, const Positions& pos);

/// W log2(1 + gamma / Gamma). Throws for negative gamma.
double rate(double gamma, const ChannelParams& params);

template <std::floating_point T>
T sinr_floor(T n, T alpha, T q, T f_m) {
  using std::log;
  using std::pow;
  return pow(T(5), -alpha / 2) * ((3 * alpha - 6) / (3 * alpha - 5)) * (q * f_m / 25) / log(n);
}

/// Worst-case interference over a sub-lattice when no fading coefficient
/// exceeds (3/q) ln n, summed over concentric rings of at most 8i cells.
template <std::floating_point T>
T interference_ceiling(T n, T x0, T alpha, T q, T K, T P0) {
  using std::log;
  using std::pow;
  return (3 * log(n) / q) * (8 * K * P0 / pow(x0, alpha)) * ((3 * alpha - 5) / (3 * alpha - 6));
}

/// SINR floor guaranteed to every scheduled receiver. Throws for alpha <= 2
/// or n <= 1.
double gamma_min(double n, const FadingModel& model, const ChannelParams& params);

double interference_upper_bound(double n, const Lattice& lat, const FadingModel& model,
                                const ChannelParams& params);

}  // namespace capscale
