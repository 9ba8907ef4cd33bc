#pragma once

#include <cmath>
#include <concepts>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "capscale/channel.hpp"
#include "capscale/traffic.hpp"

namespace capscale {

/// Raised when d is within the guard band around 1/2, where the two-case
/// bounds switch branches.
class RegimeBoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kRegimeGuard = 0.05;

/// The guard edges themselves (0.45, 0.55) are admissible.
inline void check_regime(double d) {
  if (std::abs(d - 0.5) < kRegimeGuard - 1e-12) {
    throw RegimeBoundaryError("d within " + std::to_string(kRegimeGuard) + " of 1/2");
  }
}

// ---------------------------------------------------------------------------
// Concentration tools

/// (1+e) ln(1+e) - e.
template <std::floating_point T>
T chernoff_f(T eps) {
  return (1 + eps) * std::log1p(eps) - eps;
}

/// Bounds on P[X < (1-e)kp] and P[X > (1+e)kp] for X ~ Binomial(k, p).
template <std::floating_point T>
std::pair<T, T> chernoff_tails(T k, T p, T eps) {
  if (!(k >= 1) || !(p > 0 && p <= 1) || !(eps > 0)) {
    throw std::invalid_argument("chernoff_tails: need k >= 1, p in (0,1], eps > 0");
  }
  return {std::exp(-k * p * eps * eps / 2), std::exp(-k * p * chernoff_f(eps))};
}

/// Lower bound on P[every urn holds (1 +- e) n/m balls], with the exponent
/// delta = min(e^2/2, f(e)) so that both tails are dominated.
template <std::floating_point T>
T lemma1_bound(T n, T m, T eps) {
  if (!(n >= 1) || !(m >= 1) || !(eps > 0)) {
    throw std::invalid_argument("lemma1_bound: need n, m >= 1 and eps > 0");
  }
  const T delta = std::min(eps * eps / 2, chernoff_f(eps));
  return 1 - 2 * m * std::exp(-delta * n / m);
}

// ---------------------------------------------------------------------------
// Per-cell route ceilings

/// Ceiling on routes through any cell of the asymmetric scheme.
template <std::floating_point T>
T lemma7_rmax(T n, T d) {
  check_regime(static_cast<double>(d));
  if (d > T(0.5)) return T(27) / 2 * std::sqrt(n * std::log(n));
  return 5 / (1 - 2 * d) * std::pow(n, 1 - d);
}

/// Ceiling on multicast tree edges through any cell.
template <std::floating_point T>
T eq17_rmax(T n, T d) {
  return 4 * std::pow(n * std::log(n), (1 + d) / 2);
}

// ---------------------------------------------------------------------------
// Capacity bounds. `q` and `f_m` are the fading tail constants.

template <std::floating_point T>
T alpha_ratio(T alpha) {
  return (3 * alpha - 6) / (3 * alpha - 5);
}

/// Receiver-side upper bound shared by asymmetric and cluster networks.
template <std::floating_point T>
T receiver_upper(T n, T d, T alpha, T W) {
  return 4 * alpha * W / std::numbers::ln2_v<T> * std::pow(n, d) * std::log(n);
}

template <std::floating_point T>
T asymmetric_lower(T n, T d, T alpha, T W, T q, T f_m, T Gamma) {
  check_regime(static_cast<double>(d));
  const T ln_n = std::log(n);
  const T pre = alpha_ratio(alpha) * (W * q * f_m * std::pow(T(5), -alpha / 2)) /
                (676 * Gamma * std::numbers::ln2_v<T>);
  if (d > T(0.5)) return pre * T(2) / 27 * std::sqrt(n) / std::pow(ln_n, T(1.5));
  return pre * ((1 - 2 * d) / 5) * std::pow(n, d) / ln_n;
}

template <std::floating_point T>
T multicast_lower(T n, T d, T alpha, T W, T q, T f_m, T Gamma) {
  return alpha_ratio(alpha) * (W * q * f_m * std::pow(T(5), -alpha / 2)) /
         (2700 * Gamma * std::numbers::ln2_v<T>) * std::pow(n, (d + 1) / 2) /
         std::pow(std::log(n), 1 + d / 2);
}

template <std::floating_point T>
T cluster_lower(T n, T d, T alpha, T W, T q, T f_m, T Gamma) {
  const T ln_n = std::log(n);
  return (W * q * f_m) / (338 * std::numbers::ln2_v<T> * Gamma) * alpha_ratio(alpha) *
         std::pow(T(5), -alpha / 2) * std::pow(n, d) / (ln_n * ln_n);
}

/// Infrastructure route: half the cluster lower bound.
template <std::floating_point T>
T hybrid_infra_lower(T n, T d, T alpha, T W, T q, T f_m, T Gamma) {
  return cluster_lower(n, d, alpha, W, q, f_m, Gamma) / 2;
}

/// Per-node rate of the pure ad hoc scheme that ignores access points.
template <std::floating_point T>
T adhoc_per_node(T n, T alpha, T W, T q, T f_m, T Gamma) {
  return std::pow(T(10), -(alpha + 3) / 2) / 648 * alpha_ratio(alpha) * W * q * f_m / Gamma /
         std::sqrt(n) / std::pow(std::log(n), T(1.5));
}

template <std::floating_point T>
T hybrid_adhoc_lower(T n, T alpha, T W, T q, T f_m, T Gamma) {
  return n * adhoc_per_node(n, alpha, W, q, f_m, Gamma);
}

// ---------------------------------------------------------------------------
// Reports

struct BoundReport {
  TrafficModel model = TrafficModel::kAsymmetric;
  double n = 0.0;
  double d = 0.0;
  ChannelParams params;
  std::string fading;
  double lower = 0.0;
  std::optional<double> upper;
  std::map<std::string, double> components;
};

/// Asymmetric capacity bounds. Throws RegimeBoundaryError near d = 1/2.
BoundReport thm1_bounds(double n, double d, const ChannelParams& params, const FadingModel& model);
double thm2_lower(double n, double d, const ChannelParams& params, const FadingModel& model);
BoundReport thm3_bounds(double n, double d, const ChannelParams& params, const FadingModel& model);

struct HybridLowers {
  double infrastructure = 0.0;  // half the cluster lower bound
  double adhoc = 0.0;           // n times the ad hoc per-node rate
};
HybridLowers thm4_lowers(double n, double d, const ChannelParams& params, const FadingModel& model);

/// d at which the two hybrid lower bounds coincide, by bisection on (lo, hi).
double hybrid_crossover(double n, const ChannelParams& params, const FadingModel& model,
                        double lo = 1e-6, double hi = 1.0 - 1e-6);

/// Bound report for any model; hybrid reports max of the two lowers.
BoundReport bound_report(TrafficModel model, double n, double d, const ChannelParams& params,
                         const FadingModel& fading);

struct UpperProxy {
  double d_min = 0.0;
  double throughput = 0.0;      // interference-free, always-receiving aggregate
  double eq16_probability = 0.0;  // union bound on P[d_min <= x]
};

/// Upper proxy for asymmetric (sources vs destinations) and cluster
/// (clients vs heads) instances. Requires eta > 0.
UpperProxy upper_proxy_asymmetric(const NetworkInstance& inst, double x);

/// n m pi x^2.
inline double eq16_probability(double n, double m, double x) {
  return n * m * std::numbers::pi * x * x;
}

}  // namespace capscale
