#include "capscale/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace capscale {

std::string_view to_string(TrafficModel m) {
  switch (m) {
    case TrafficModel::kAsymmetric: return "asymmetric";
    case TrafficModel::kMulticast: return "multicast";
    case TrafficModel::kCluster: return "cluster";
    case TrafficModel::kHybrid: return "hybrid";
  }
  return "?";
}

TrafficModel traffic_model_from_string(std::string_view s) {
  if (s == "asymmetric") return TrafficModel::kAsymmetric;
  if (s == "multicast") return TrafficModel::kMulticast;
  if (s == "cluster") return TrafficModel::kCluster;
  if (s == "hybrid") return TrafficModel::kHybrid;
  throw std::invalid_argument("unknown traffic model: " + std::string(s));
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSource: return "source";
    case Role::kDestination: return "destination";
    case Role::kClient: return "client";
    case Role::kClusterHead: return "cluster-head";
    case Role::kWireless: return "wireless";
    case Role::kAccessPoint: return "access-point";
  }
  return "?";
}

std::vector<NodeId> NetworkInstance::nodes_with_role(Role r) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == r) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::size_t secondary_count(std::size_t n, double d) {
  // The epsilon absorbs pow() rounding at exact integer powers (16^0.5).
  const double v = std::floor(std::pow(static_cast<double>(n), d) + 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

namespace {

void check_exponent(double d) {
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("exponent d must lie in (0,1)");
}

NetworkInstance skeleton(TrafficModel model, std::size_t n, std::size_t m, double d,
                         std::uint64_t seed, const ChannelParams& params,
                         const FadingModel& fading, Role primary, Role secondary) {
  params.validate();
  NetworkInstance inst;
  inst.model = model;
  inst.d = d;
  inst.n = n;
  inst.m = m;
  inst.seed = seed;
  inst.params = params;
  inst.fading = PairFading(derive_seed(seed, 1), fading);
  Rng placement(derive_seed(seed, 0));
  inst.positions = place_nodes(n + m, placement);
  inst.roles.assign(n, primary);
  inst.roles.resize(n + m, secondary);
  return inst;
}

}  // namespace

NetworkInstance gen_asymmetric(std::size_t n, double d, std::uint64_t seed,
                               const ChannelParams& params, const FadingModel& model) {
  if (n < 2) throw std::invalid_argument("asymmetric: n must be >= 2");
  check_exponent(d);
  const std::size_t m = secondary_count(n, d);
  NetworkInstance inst = skeleton(TrafficModel::kAsymmetric, n, m, d, seed, params, model,
                                  Role::kSource, Role::kDestination);
  Rng rng(derive_seed(seed, 2));
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  inst.demands.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    inst.demands.push_back({static_cast<std::uint32_t>(s), static_cast<NodeId>(s),
                            {static_cast<NodeId>(n + pick(rng))}});
  }
  return inst;
}

NetworkInstance gen_multicast(std::size_t n, double d, std::uint64_t seed,
                              const ChannelParams& params, const FadingModel& model) {
  if (n < 2) throw std::invalid_argument("multicast: n must be >= 2");
  check_exponent(d);
  const std::size_t m = secondary_count(n, d);
  if (m > n - 1) throw std::invalid_argument("multicast: more destinations than other nodes");
  NetworkInstance inst = skeleton(TrafficModel::kMulticast, n, 0, d, seed, params, model,
                                  Role::kSource, Role::kDestination);
  inst.m = m;
  Rng rng(derive_seed(seed, 2));
  inst.demands.reserve(n);
  std::vector<NodeId> chosen;
  std::vector<std::size_t> stamp(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    // Floyd's sampling of m distinct values from [0, n-1), then skip the source.
    chosen.clear();
    for (std::size_t j = n - 1 - m; j < n - 1; ++j) {
      const auto t = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, j)(rng));
      const NodeId pick = stamp[t] == s + 1 ? static_cast<NodeId>(j) : t;
      stamp[pick] = s + 1;
      chosen.push_back(pick);
    }
    for (NodeId& t : chosen) {
      if (t >= s) ++t;
    }
    std::sort(chosen.begin(), chosen.end());
    inst.demands.push_back({static_cast<std::uint32_t>(s), static_cast<NodeId>(s), chosen});
  }
  return inst;
}

NetworkInstance gen_cluster(std::size_t n, double d, std::uint64_t seed,
                            const ChannelParams& params, const FadingModel& model) {
  if (n < 1) throw std::invalid_argument("cluster: n must be >= 1");
  check_exponent(d);
  const std::size_t m = secondary_count(n, d);
  NetworkInstance inst = skeleton(TrafficModel::kCluster, n, m, d, seed, params, model,
                                  Role::kClient, Role::kClusterHead);
  inst.demands.reserve(2 * n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto client = static_cast<NodeId>(c);
    inst.demands.push_back({static_cast<std::uint32_t>(2 * c), client, {kAnyHead}});
    inst.demands.push_back({static_cast<std::uint32_t>(2 * c + 1), kAnyHead, {client}});
  }
  return inst;
}

NetworkInstance gen_hybrid(std::size_t n, double d, std::uint64_t seed,
                           const ChannelParams& params, const FadingModel& model) {
  if (n < 2) throw std::invalid_argument("hybrid: n must be >= 2");
  check_exponent(d);
  const std::size_t m = secondary_count(n, d);
  NetworkInstance inst = skeleton(TrafficModel::kHybrid, n, m, d, seed, params, model,
                                  Role::kWireless, Role::kAccessPoint);
  Rng rng(derive_seed(seed, 2));
  std::vector<NodeId> perm(n);
  auto has_fixed_point = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] == i) return true;
    }
    return false;
  };
  do {
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::shuffle(perm.begin(), perm.end(), rng);
  } while (has_fixed_point());
  inst.demands.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    inst.demands.push_back({static_cast<std::uint32_t>(s), static_cast<NodeId>(s), {perm[s]}});
  }
  return inst;
}

NetworkInstance generate(TrafficModel model, std::size_t n, double d, std::uint64_t seed,
                         const ChannelParams& params, const FadingModel& fading) {
  switch (model) {
    case TrafficModel::kAsymmetric: return gen_asymmetric(n, d, seed, params, fading);
    case TrafficModel::kMulticast: return gen_multicast(n, d, seed, params, fading);
    case TrafficModel::kCluster: return gen_cluster(n, d, seed, params, fading);
    case TrafficModel::kHybrid: return gen_hybrid(n, d, seed, params, fading);
  }
  throw std::invalid_argument("unknown traffic model");
}

}  // namespace capscale
