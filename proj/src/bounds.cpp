#include "capscale/bounds.hpp"

#include <algorithm>
#include <limits>

namespace capscale {

namespace {

void check_n(double n) {
  if (!(n >= 3.0)) throw std::invalid_argument("bounds: n must be >= 3");
}

void check_d(double d) {
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("bounds: d must lie in (0,1)");
}

BoundReport skeleton(TrafficModel model, double n, double d, const ChannelParams& params,
                     const FadingModel& fading) {
  params.validate();
  check_n(n);
  check_d(d);
  BoundReport rep;
  rep.model = model;
  rep.n = n;
  rep.d = d;
  rep.params = params;
  rep.fading = fading.name();
  rep.components["gamma_min"] = gamma_min(n, fading, params);
  rep.components["q"] = fading.q;
  rep.components["f_m"] = fading.f_m;
  return rep;
}

}  // namespace

BoundReport thm1_bounds(double n, double d, const ChannelParams& p, const FadingModel& f) {
  BoundReport rep = skeleton(TrafficModel::kAsymmetric, n, d, p, f);
  rep.lower = asymmetric_lower(n, d, p.alpha, p.W, f.q, f.f_m, p.Gamma);
  rep.upper = receiver_upper(n, d, p.alpha, p.W);
  rep.components["r_max"] = lemma7_rmax(n, d);
  return rep;
}

double thm2_lower(double n, double d, const ChannelParams& p, const FadingModel& f) {
  p.validate();
  check_n(n);
  check_d(d);
  return multicast_lower(n, d, p.alpha, p.W, f.q, f.f_m, p.Gamma);
}

BoundReport thm3_bounds(double n, double d, const ChannelParams& p, const FadingModel& f) {
  BoundReport rep = skeleton(TrafficModel::kCluster, n, d, p, f);
  rep.lower = cluster_lower(n, d, p.alpha, p.W, f.q, f.f_m, p.Gamma);
  rep.upper = receiver_upper(n, d, p.alpha, p.W);
  return rep;
}

HybridLowers thm4_lowers(double n, double d, const ChannelParams& p, const FadingModel& f) {
  p.validate();
  check_n(n);
  check_d(d);
  return {hybrid_infra_lower(n, d, p.alpha, p.W, f.q, f.f_m, p.Gamma),
          hybrid_adhoc_lower(n, p.alpha, p.W, f.q, f.f_m, p.Gamma)};
}

double hybrid_crossover(double n, const ChannelParams& p, const FadingModel& f, double lo,
                        double hi) {
  auto gap = [&](double d) {
    const HybridLowers h = thm4_lowers(n, d, p, f);
    return h.infrastructure - h.adhoc;
  };
  double glo = gap(lo);
  if (glo * gap(hi) > 0.0) {
    throw std::domain_error("hybrid_crossover: no sign change on the bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = gap(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BoundReport bound_report(TrafficModel model, double n, double d, const ChannelParams& p,
                         const FadingModel& f) {
  switch (model) {
    case TrafficModel::kAsymmetric: return thm1_bounds(n, d, p, f);
    case TrafficModel::kCluster: return thm3_bounds(n, d, p, f);
    case TrafficModel::kMulticast: {
      BoundReport rep = skeleton(model, n, d, p, f);
      rep.lower = thm2_lower(n, d, p, f);
      rep.components["r_max"] = eq17_rmax(n, d);
      rep.components["spacing"] = std::max(1.0, std::round(std::pow(n, (1 - d) / 2) /
                                                           (3 * std::sqrt(std::log(n)))));
      return rep;
    }
    case TrafficModel::kHybrid: {
      BoundReport rep = skeleton(model, n, d, p, f);
      const HybridLowers h = thm4_lowers(n, d, p, f);
      rep.components["infrastructure"] = h.infrastructure;
      rep.components["adhoc"] = h.adhoc;
      rep.lower = std::max(h.infrastructure, h.adhoc);
      return rep;
    }
  }
  throw std::invalid_argument("bound_report: unknown model");
}

UpperProxy upper_proxy_asymmetric(const NetworkInstance& inst, double x) {
  if (inst.model != TrafficModel::kAsymmetric && inst.model != TrafficModel::kCluster) {
    throw std::invalid_argument("upper_proxy_asymmetric: asymmetric or cluster instance required");
  }
  const ChannelParams& p = inst.params;
  p.validate();
  if (!(p.eta > 0.0)) throw std::invalid_argument("upper_proxy_asymmetric: requires eta > 0");
  if (inst.m == 0 || inst.n == 0) throw std::invalid_argument("upper_proxy_asymmetric: empty instance");

  const auto n = static_cast<Eigen::Index>(inst.n);
  const auto m = static_cast<Eigen::Index>(inst.m);
  const auto primary = inst.positions.leftCols(n);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Vector2d s = inst.positions.col(n + j);
    best = std::min(best, (primary.colwise() - s).colwise().squaredNorm().minCoeff());
  }
  UpperProxy out;
  out.d_min = std::sqrt(best);
  const double q = inst.fading.model().q;
  const double ln_n = std::log(std::max(2.0, static_cast<double>(inst.n)));
  const double snr = p.K * p.P0 * std::pow(out.d_min, -p.alpha) * (3.0 / q) * ln_n / (p.eta * p.Gamma);
  out.throughput = static_cast<double>(inst.m) * p.W * std::log2(1.0 + snr);
  out.eq16_probability = eq16_probability(static_cast<double>(inst.n), static_cast<double>(inst.m), x);
  return out;
}

}  // namespace capscale
