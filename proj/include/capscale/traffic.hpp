#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "capscale/channel.hpp"
#include "capscale/geometry.hpp"

namespace capscale {

enum class TrafficModel { kAsymmetric, kMulticast, kCluster, kHybrid };

std::string_view to_string(TrafficModel m);
TrafficModel traffic_model_from_string(std::string_view s);

enum class Role : std::uint8_t {
  kSource,
  kDestination,
  kClient,
  kClusterHead,
  kWireless,
  kAccessPoint,
};

std::string_view to_string(Role r);

/// Endpoint placeholder for cluster streams: "any cluster head", resolved by
/// routing.
inline constexpr NodeId kAnyHead = std::numeric_limits<NodeId>::max();

struct Demand {
  std::uint32_t stream = 0;
  NodeId source = 0;
  std::vector<NodeId> destinations;  // singleton except for multicast
};

/// One random draw of a network: placement, roles, demands and the channel.
/// Primary nodes (sources, clients, wireless nodes) take ids [0, n); the
/// secondary population (destinations, heads, access points) takes
/// [n, n + m). Multicast instances have no secondary population.
struct NetworkInstance {
  TrafficModel model = TrafficModel::kAsymmetric;
  double d = 0.5;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  Positions positions;
  std::vector<Role> roles;
  std::vector<Demand> demands;
  PairFading fading;
  ChannelParams params;

  std::size_t node_count() const { return roles.size(); }
  std::vector<NodeId> nodes_with_role(Role r) const;
  bool is_secondary(NodeId id) const { return id >= n; }
};

/// max(1, floor(n^d)).
std::size_t secondary_count(std::size_t n, double d);

NetworkInstance gen_asymmetric(std::size_t n, double d, std::uint64_t seed,
                               const ChannelParams& params, const FadingModel& model);
NetworkInstance gen_multicast(std::size_t n, double d, std::uint64_t seed,
                              const ChannelParams& params, const FadingModel& model);
NetworkInstance gen_cluster(std::size_t n, double d, std::uint64_t seed,
                            const ChannelParams& params, const FadingModel& model);
NetworkInstance gen_hybrid(std::size_t n, double d, std::uint64_t seed,
                           const ChannelParams& params, const FadingModel& model);

NetworkInstance generate(TrafficModel model, std::size_t n, double d, std::uint64_t seed,
                         const ChannelParams& params, const FadingModel& fading);

}  // namespace capscale
