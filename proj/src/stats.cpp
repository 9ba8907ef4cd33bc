#include "capscale/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "capscale/bounds.hpp"
#include "capscale/routing.hpp"
#include "capscale/schedule.hpp"

namespace capscale {

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, count))));
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned k = 0; k < w; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

Lemma1Result verify_lemma1(std::size_t trials, std::size_t n, std::size_t m, double eps,
                           std::uint64_t seed, unsigned workers) {
  if (trials < 1) throw std::invalid_argument("verify_lemma1: trials must be >= 1");
  if (n < 1 || m < 1) throw std::invalid_argument("verify_lemma1: n and m must be >= 1");
  const double mean = static_cast<double>(n) / static_cast<double>(m);
  const double lo = (1.0 - eps) * mean;
  const double hi = (1.0 + eps) * mean;
  std::vector<char> ok(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    // Sequential conditional binomials give an exact multinomial draw.
    std::size_t left = n;
    bool good = true;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t b = left;
      if (j + 1 < m) {
        std::binomial_distribution<std::size_t> draw(left, 1.0 / static_cast<double>(m - j));
        b = draw(rng);
      }
      left -= b;
      const double bj = static_cast<double>(b);
      if (bj < lo || bj > hi) good = false;
    }
    ok[t] = good;
  });
  Lemma1Result res;
  res.trials = trials;
  res.successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  res.frequency = static_cast<double>(res.successes) / static_cast<double>(trials);
  res.bound = lemma1_bound(static_cast<double>(n), static_cast<double>(m), eps);
  res.sigma = std::sqrt(res.frequency * (1.0 - res.frequency) / static_cast<double>(trials));
  return res;
}

std::pair<double, bool> max_pair_fading(const PairFading& pf, std::size_t nodes,
                                        std::size_t pair_budget, std::uint64_t seed) {
  if (nodes < 2) throw std::invalid_argument("max_pair_fading: need at least two nodes");
  const double pairs = 0.5 * static_cast<double>(nodes) * static_cast<double>(nodes - 1);
  double best = 0.0;
  if (pairs <= static_cast<double>(pair_budget)) {
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
      for (std::size_t j = i + 1; j < nodes; ++j) {
        best = std::max(best, pf(static_cast<NodeId>(i), static_cast<NodeId>(j)));
      }
    }
    return {best, false};
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  for (std::size_t k = 0; k < pair_budget; ++k) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    best = std::max(best, pf(static_cast<NodeId>(i), static_cast<NodeId>(j)));
  }
  return {best, true};
}

Lemma2Result verify_lemma2(std::size_t trials, std::size_t n, const FadingModel& model,
                           std::uint64_t seed, std::size_t pair_budget, unsigned workers) {
  if (trials < 1) throw std::invalid_argument("verify_lemma2: trials must be >= 1");
  if (n < 2) throw std::invalid_argument("verify_lemma2: n must be >= 2");
  Lemma2Result res;
  res.trials = trials;
  res.threshold = 3.0 / model.q * std::log(static_cast<double>(n));
  std::vector<double> maxima(trials, 0.0);
  std::vector<char> sub(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(seed, t);
    const auto [mx, flag] = max_pair_fading(PairFading(s, model), n, pair_budget, derive_seed(s, 1));
    maxima[t] = mx;
    sub[t] = flag;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    res.successes += maxima[t] <= res.threshold;
    res.max_fading = std::max(res.max_fading, maxima[t]);
    res.subsampled = res.subsampled || sub[t];
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  res.pairs_per_trial = res.subsampled ? pair_budget : static_cast<std::size_t>(pairs);
  res.frequency = static_cast<double>(res.successes) / static_cast<double>(trials);
  return res;
}

OccupancyReport verify_occupancy(const NetworkInstance& inst, const Lattice& lat) {
  const std::size_t g = static_cast<std::size_t>(lat.cell_count());
  const int r = lat.r();
  Eigen::VectorXi prim = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(g));
  Eigen::VectorXi sec = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(g));
  Eigen::VectorXi col = Eigen::VectorXi::Zero(r);
  Eigen::VectorXi row = Eigen::VectorXi::Zero(r);
  for (std::size_t i = 0; i < inst.node_count(); ++i) {
    const CellCoord c = cell_of(inst.positions.col(static_cast<Eigen::Index>(i)), lat);
    const auto idx = static_cast<Eigen::Index>(lat.index(c));
    if (i < inst.n) {
      ++prim(idx);
      ++col(c.v1 - 1);
    } else {
      ++sec(idx);
      ++row(c.v2 - 1);
    }
  }
  OccupancyReport rep;
  rep.primary_min = prim.minCoeff();
  rep.primary_max = prim.maxCoeff();
  rep.column_max = col.maxCoeff();
  rep.row_max = row.maxCoeff();
  rep.secondary_min = sec.minCoeff();
  rep.secondary_max = sec.maxCoeff();

  const double n = std::max(2.0, static_cast<double>(inst.n));
  const double ln_n = std::log(n);
  const double d = inst.d;
  auto within = [](int lo_count, int hi_count, double lo, double hi) {
    return static_cast<double>(lo_count) >= lo && static_cast<double>(hi_count) <= hi;
  };

  if (inst.model == TrafficModel::kCluster) {
    const double scale = std::pow(n, 1.0 - d) * ln_n;
    rep.eq20 = within(rep.primary_min, rep.primary_max, 4.5 * scale, 13.5 * scale);
    rep.eq21 = within(rep.secondary_min, rep.secondary_max, 4.5 * ln_n, 13.5 * ln_n);
    return rep;
  }
  rep.eq10 = within(rep.primary_min, rep.primary_max, 4.5 * ln_n, 13.5 * ln_n);
  rep.eq11 = rep.column_max <= 4.5 * std::sqrt(n * ln_n);
  if (inst.model == TrafficModel::kAsymmetric) {
    if (d > 0.5 + kRegimeGuard - 1e-12) {
      rep.eq12 = rep.row_max <= 4.5 * std::pow(n, d - 0.5) * std::sqrt(ln_n);
    } else if (d < 0.5 - kRegimeGuard + 1e-12) {
      rep.eq13 = rep.row_max <= 2.0 / (1.0 - 2.0 * d);
    }
  }
  return rep;
}

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("fit_scaling: need at least 3 points");
  const auto k = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(k, 2);
  Eigen::VectorXd y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto [n, agg] = points[static_cast<std::size_t>(i)];
    if (!(n > 0.0) || !(agg > 0.0)) throw std::invalid_argument("fit_scaling: values must be positive");
    X(i, 0) = std::log(n);
    X(i, 1) = 1.0;
    y(i) = std::log(agg);
  }
  if ((X.col(0).array() == X(0, 0)).all()) throw std::invalid_argument("fit_scaling: n values must differ");
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  ScalingFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.residual = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(k));
  return fit;
}

std::uint64_t trial_seed(std::uint64_t campaign_seed, std::size_t n, std::size_t t) {
  return derive_seed(derive_seed(campaign_seed, n), t);
}

TrialSummary run_trial(const CampaignConfig& cfg, std::size_t n, std::size_t t) {
  TrialSummary s;
  s.n = n;
  s.trial = t;
  s.seed = trial_seed(cfg.seed, n, t);
  try {
    const NetworkInstance inst = generate(cfg.model, n, cfg.d, s.seed, cfg.params, cfg.fading);
    const RoutingPlan plan = route_instance(inst, HybridMode::kAdhoc);
    const CellLoad load = cell_loads(plan.routes, plan.lattice, inst);
    s.max_streams = load.max_streams();
    s.max_receptions = load.max_receptions();
    for (const Route& r : plan.routes) {
      for (const Hop& h : r.hops) {
        if (!h.wireless()) continue;
        ++s.hops;
        s.degraded_hops += h.degraded;
      }
    }

    const OccupancyReport occ = verify_occupancy(inst, plan.lattice);
    s.eq10 = occ.eq10;
    s.eq11 = occ.eq11;
    s.eq12 = occ.eq12;
    s.eq13 = occ.eq13;
    s.eq20 = occ.eq20;
    s.eq21 = occ.eq21;

    const double nd = static_cast<double>(n);
    if (cfg.model == TrafficModel::kAsymmetric && std::abs(cfg.d - 0.5) >= kRegimeGuard) {
      const double rmax = lemma7_rmax(nd, cfg.d);
      s.lemma7 = s.max_streams <= rmax;
      s.load_ceiling = s.max_receptions <= 3.0 * rmax;
    }
    if (cfg.model == TrafficModel::kMulticast) {
      const double rmax = eq17_rmax(nd, cfg.d);
      s.eq17 = s.max_streams <= rmax;
      s.load_ceiling = s.max_receptions <= 3.0 * rmax;
    }

    const auto [mx, sub] = max_pair_fading(inst.fading, inst.node_count(), cfg.pair_budget,
                                           derive_seed(s.seed, 3));
    s.max_fading = mx;
    s.fading_subsampled = sub;
    s.lemma2 = mx <= 3.0 / cfg.fading.q * std::log(static_cast<double>(inst.node_count()));

    if (cfg.model == TrafficModel::kHybrid) {
      s.aggregate = throughput_hybrid(inst, ThroughputMode::kMeasured).best;
    } else {
      s.aggregate = throughput(inst, ThroughputMode::kMeasured, &load).aggregate;
    }
    try {
      s.aggregate_formula = throughput(inst, ThroughputMode::kFormula).aggregate;
    } catch (const RegimeBoundaryError&) {
      s.aggregate_formula = 0.0;
    }

    if (cfg.simulate) {
      const Frame frame = build_frame(plan.routes, plan.lattice, inst);
      const auto records = simulate_frame(frame, inst);
      const FloorStats fs = floor_stats(records, gamma_min(nd, cfg.fading, cfg.params));
      s.floor_fraction = fs.fraction();
      s.floor_clean = fs.clean;
      s.floor_above = fs.clean_above;
      s.sinr_floor = fs.fraction() >= 0.99;
    }
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  return s;
}

std::vector<ClaimFrequency> claim_frequencies(std::span<const TrialSummary> trials) {
  using Field = std::optional<bool> TrialSummary::*;
  const std::pair<const char*, Field> fields[] = {
      {"eq10", &TrialSummary::eq10},       {"eq11", &TrialSummary::eq11},
      {"eq12", &TrialSummary::eq12},       {"eq13", &TrialSummary::eq13},
      {"eq20", &TrialSummary::eq20},       {"eq21", &TrialSummary::eq21},
      {"lemma2", &TrialSummary::lemma2},   {"lemma7", &TrialSummary::lemma7},
      {"eq17", &TrialSummary::eq17},       {"load_ceiling", &TrialSummary::load_ceiling},
      {"sinr_floor", &TrialSummary::sinr_floor},
  };
  std::vector<ClaimFrequency> out;
  for (const auto& [name, field] : fields) {
    ClaimFrequency c{name, 0, 0};
    for (const TrialSummary& t : trials) {
      if (!(t.*field)) continue;
      ++c.evaluated;
      c.held += *(t.*field);
    }
    if (c.evaluated) out.push_back(c);
  }
  return out;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  if (cfg.n_grid.empty()) throw std::invalid_argument("run_campaign: empty n grid");
  if (cfg.trials < 1) throw std::invalid_argument("run_campaign: trials must be >= 1");
  cfg.params.validate();
  CampaignResult res;
  const std::size_t total = cfg.n_grid.size() * cfg.trials;
  res.trials.resize(total);
  parallel_for(total, cfg.workers, [&](std::size_t k) {
    res.trials[k] = run_trial(cfg, cfg.n_grid[k / cfg.trials], k % cfg.trials);
  });
  std::vector<std::pair<double, double>> pts;
  for (const TrialSummary& t : res.trials) {
    if (t.error.empty() && t.aggregate > 0.0) pts.emplace_back(static_cast<double>(t.n), t.aggregate);
  }
  const bool spread = std::any_of(pts.begin(), pts.end(),
                                  [&](const auto& p) { return !pts.empty() && p.first != pts.front().first; });
  if (pts.size() >= 3 && spread) res.fit = fit_scaling(pts);
  res.claims = claim_frequencies(res.trials);
  return res;
}

}  // namespace capscale
