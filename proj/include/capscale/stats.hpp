#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capscale/channel.hpp"
#include "capscale/geometry.hpp"
#include "capscale/traffic.hpp"

namespace capscale {

/// Runs fn(0..count-1) on up to `workers` threads. fn must write only to
/// its own slot of any shared output. Exceptions are rethrown after join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

struct Lemma1Result {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double frequency = 0.0;
  double bound = 0.0;  // lemma1_bound(n, m, eps), possibly negative
  double sigma = 0.0;  // binomial standard error of the frequency
  /// frequency >= bound - 3 sigma.
  bool consistent() const { return frequency >= bound - 3.0 * sigma; }
};

/// n balls into m urns per trial; success when every urn holds within
/// (1 +- eps) n / m. Urn counts are drawn as an exact multinomial.
Lemma1Result verify_lemma1(std::size_t trials, std::size_t n, std::size_t m, double eps,
                           std::uint64_t seed, unsigned workers = 1);

inline constexpr std::size_t kDefaultPairBudget = std::size_t{1} << 22;

struct Lemma2Result {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double frequency = 0.0;
  double threshold = 0.0;   // (3/q) ln n
  double max_fading = 0.0;  // largest coefficient seen over all trials
  std::size_t pairs_per_trial = 0;
  bool subsampled = false;  // pair count exceeded the budget
};

/// Fraction of trials whose largest pairwise fading stays within (3/q) ln n.
/// Streams the maximum; above `pair_budget` pairs, samples that many pairs
/// uniformly instead and sets `subsampled`.
Lemma2Result verify_lemma2(std::size_t trials, std::size_t n, const FadingModel& model,
                           std::uint64_t seed, std::size_t pair_budget = kDefaultPairBudget,
                           unsigned workers = 1);

/// Largest pairwise fading of one instance, with the same budget rule.
std::pair<double, bool> max_pair_fading(const PairFading& pf, std::size_t nodes,
                                        std::size_t pair_budget, std::uint64_t seed);

/// Occupancy claims on exact counts. A claim that does not apply to the
/// instance's model or regime is left empty.
struct OccupancyReport {
  std::optional<bool> eq10;  // per-cell primary count within [4.5, 13.5] ln n
  std::optional<bool> eq11;  // per-column primary count <= 4.5 sqrt(n ln n)
  std::optional<bool> eq12;  // d > 1/2: per-row secondary <= 4.5 n^(d-1/2) sqrt(ln n)
  std::optional<bool> eq13;  // d < 1/2: per-row secondary <= 2 / (1 - 2d)
  std::optional<bool> eq20;  // cluster: clients per cell within [4.5, 13.5] n^(1-d) ln n
  std::optional<bool> eq21;  // cluster: heads per cell within [4.5, 13.5] ln n
  int primary_min = 0;
  int primary_max = 0;
  int column_max = 0;
  int row_max = 0;
  int secondary_min = 0;
  int secondary_max = 0;
};

OccupancyReport verify_occupancy(const NetworkInstance& inst, const Lattice& lat);

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (n, aggregate)
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS in log space
};

/// Least squares of ln(aggregate) on ln(n). Needs >= 3 positive points.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points);

struct CampaignConfig {
  TrafficModel model = TrafficModel::kAsymmetric;
  double d = 0.75;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  ChannelParams params;
  FadingModel fading = FadingModel::trivial();
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool simulate = false;  // run the TDMA frame and check the SINR floor
  std::size_t pair_budget = std::size_t{1} << 21;
};

struct TrialSummary {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when the trial failed

  std::optional<bool> eq10, eq11, eq12, eq13, eq20, eq21;
  std::optional<bool> lemma2;
  std::optional<bool> lemma7;  // routes per cell <= asymmetric ceiling
  std::optional<bool> eq17;    // trees per cell <= multicast ceiling
  std::optional<bool> load_ceiling;  // receptions per cell <= 3 x the model's ceiling
  std::optional<bool> sinr_floor;

  int max_streams = 0;
  int max_receptions = 0;
  double max_fading = 0.0;
  bool fading_subsampled = false;
  double aggregate = 0.0;          // measured mode
  double aggregate_formula = 0.0;  // formula mode, 0 when undefined
  std::size_t hops = 0;
  std::size_t degraded_hops = 0;
  std::optional<double> floor_fraction;
  std::size_t floor_clean = 0;  // non-degraded simulated receptions
  std::size_t floor_above = 0;  // ... at or above the SINR floor
};

/// Seed of trial t at grid size n.
std::uint64_t trial_seed(std::uint64_t campaign_seed, std::size_t n, std::size_t t);

TrialSummary run_trial(const CampaignConfig& cfg, std::size_t n, std::size_t t);

struct ClaimFrequency {
  std::string claim;
  std::size_t held = 0;
  std::size_t evaluated = 0;
  double frequency() const { return evaluated ? static_cast<double>(held) / evaluated : 0.0; }
};

struct CampaignResult {
  std::vector<TrialSummary> trials;  // grid-major, trial-minor
  std::optional<ScalingFit> fit;     // needs >= 3 successful trials
  std::vector<ClaimFrequency> claims;
};

/// Trials ordered by (grid index, trial index); identical for any worker count.
CampaignResult run_campaign(const CampaignConfig& cfg);

std::vector<ClaimFrequency> claim_frequencies(std::span<const TrialSummary> trials);

}  // namespace capscale
