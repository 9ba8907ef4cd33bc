#include "capscale/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace capscale {

void ChannelParams::validate() const {
  if (!(alpha > 2.0)) throw std::invalid_argument("alpha must exceed 2");
  if (!(K > 0.0)) throw std::invalid_argument("K must be positive");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (!(P0 > 0.0)) throw std::invalid_argument("P0 must be positive");
  if (!(W > 0.0)) throw std::invalid_argument("W must be positive");
  if (!(Gamma >= 1.0)) throw std::invalid_argument("Gamma must be >= 1");
}

namespace {

constexpr double kScanStep = 0.01;
constexpr double kScanEnd = 60.0;

double erlang_survival(int m, double x) {
  if (x <= 0.0) return 1.0;
  const double mx = m * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < m; ++k) {
    term *= mx / k;
    sum += term;
  }
  return std::exp(-mx) * sum;
}

double ricean_pdf(double k, double t) {
  if (t < 0.0) return 0.0;
  return (k + 1.0) * std::exp(-k - (k + 1.0) * t) *
         std::cyl_bessel_i(0.0, 2.0 * std::sqrt(k * (k + 1.0) * t));
}

double ricean_survival(double k, double x) {
  if (x <= 0.0) return 1.0;
  constexpr int kPanels = 4000;  // even
  const double hi = x + 120.0;
  const double h = (hi - x) / kPanels;
  double acc = ricean_pdf(k, x) + ricean_pdf(k, hi);
  for (int i = 1; i < kPanels; ++i) acc += (i % 2 ? 4.0 : 2.0) * ricean_pdf(k, x + i * h);
  return acc * h / 3.0;
}

// Smallest scan point beyond which survival(x) <= exp(-q x) holds on the scan.
template <typename Survival>
double tail_threshold(Survival&& survival, double q) {
  double last_violation = 0.0;
  for (double x = kScanStep; x <= kScanEnd; x += kScanStep) {
    if (survival(x) > std::exp(-q * x)) last_violation = x;
  }
  return last_violation + kScanStep;
}

template <typename Survival>
double solve_median(Survival&& survival, double hi) {
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (survival(mid) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double unit(std::uint64_t key) { return to_open_unit(mix64(key)); }

}  // namespace

FadingModel FadingModel::trivial() {
  return {FadingKind::kTrivial, 0.0, 1.0, 1.0, 1.0};
}

FadingModel FadingModel::rayleigh() {
  return {FadingKind::kRayleigh, 0.0, 1.0, kScanStep, std::numbers::ln2};
}

FadingModel FadingModel::nakagami(int m) {
  if (m < 1) throw std::invalid_argument("nakagami: m must be a positive integer");
  FadingModel f{FadingKind::kNakagami, static_cast<double>(m), 1.0, 0.0, 0.0};
  auto s = [m](double x) { return erlang_survival(m, x); };
  f.x1 = tail_threshold(s, f.q);
  f.f_m = solve_median(s, 10.0);
  return f;
}

FadingModel FadingModel::ricean(double k_factor) {
  if (!(k_factor >= 0.0)) throw std::invalid_argument("ricean: K-factor must be >= 0");
  FadingModel f{FadingKind::kRicean, k_factor, 1.0, 0.0, 0.0};

  // Tail table by backward trapezoid on a fine grid; one pass serves both
  // the threshold scan and the median.
  constexpr double h = 0.002;
  constexpr double top = 180.0;
  const int count = static_cast<int>(top / h) + 1;
  std::vector<double> tail(count, 0.0);
  double prev = ricean_pdf(k_factor, top);
  for (int i = count - 2; i >= 0; --i) {
    const double cur = ricean_pdf(k_factor, i * h);
    tail[i] = tail[i + 1] + 0.5 * h * (cur + prev);
    prev = cur;
  }
  auto s = [&](double x) {
    const double pos = x / h;
    const int i = std::min(static_cast<int>(pos), count - 2);
    const double w = pos - i;
    return (1.0 - w) * tail[i] + w * tail[i + 1];
  };
  f.x1 = tail_threshold(s, f.q);
  f.f_m = solve_median(s, 10.0);
  return f;
}

FadingModel FadingModel::from_name(std::string_view name) {
  if (name == "trivial") return trivial();
  if (name == "rayleigh" || name == "exponential") return rayleigh();
  auto parse_suffix = [&](std::string_view prefix) -> double {
    const std::string tail(name.substr(prefix.size()));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tail.empty() || used != tail.size()) {
      throw std::invalid_argument("unknown fading model: " + std::string(name));
    }
    return v;
  };
  if (name.starts_with("nakagami-")) {
    const double m = parse_suffix("nakagami-");
    if (m != std::floor(m)) throw std::invalid_argument("nakagami: m must be an integer");
    return nakagami(static_cast<int>(m));
  }
  if (name.starts_with("ricean-")) return ricean(parse_suffix("ricean-"));
  throw std::invalid_argument("unknown fading model: " + std::string(name));
}

std::string FadingModel::name() const {
  std::ostringstream os;
  switch (kind) {
    case FadingKind::kTrivial: return "trivial";
    case FadingKind::kRayleigh: return "rayleigh";
    case FadingKind::kNakagami: os << "nakagami-" << static_cast<int>(shape); break;
    case FadingKind::kRicean: os << "ricean-" << shape; break;
  }
  return os.str();
}

double FadingModel::sample(std::uint64_t key) const {
  switch (kind) {
    case FadingKind::kTrivial:
      return 1.0;
    case FadingKind::kRayleigh:
      return -std::log(unit(key));
    case FadingKind::kNakagami: {
      const int m = static_cast<int>(shape);
      double acc = 0.0;
      for (int k = 0; k < m; ++k) acc -= std::log(unit(hash_combine(key, k)));
      return acc / m;
    }
    case FadingKind::kRicean: {
      const double los = std::sqrt(shape / (shape + 1.0));
      const double sigma = std::sqrt(0.5 / (shape + 1.0));
      const double radius = std::sqrt(-2.0 * std::log(unit(key)));
      const double theta = 2.0 * std::numbers::pi * unit(hash_combine(key, 1));
      const double a = los + sigma * radius * std::cos(theta);
      const double b = sigma * radius * std::sin(theta);
      return a * a + b * b;
    }
  }
  return 1.0;
}

double FadingModel::survival(double x) const {
  switch (kind) {
    case FadingKind::kTrivial: return x < 1.0 ? 1.0 : 0.0;
    case FadingKind::kRayleigh: return x <= 0.0 ? 1.0 : std::exp(-x);
    case FadingKind::kNakagami: return erlang_survival(static_cast<int>(shape), x);
    case FadingKind::kRicean: return ricean_survival(shape, x);
  }
  return 0.0;
}

double PairFading::operator()(NodeId i, NodeId j) const {
  if (i == j) throw std::invalid_argument("fading: no self-link");
  const std::uint64_t lo = std::min(i, j);
  const std::uint64_t hi = std::max(i, j);
  return model_.sample(hash_combine(seed_, (lo << 32) | hi));
}

double gain(const PairFading& pf, const ChannelParams& params, NodeId i, NodeId j,
            const Positions& pos) {
  params.validate();
  const double dist = (pos.col(i) - pos.col(j)).norm();
  if (dist == 0.0) throw std::domain_error("gain: coincident positions");
  return params.K * pf(i, j) * std::pow(dist, -params.alpha);
}

double interference_at(NodeId rx, NodeId tx, std::span<const NodeId> active,
                       const PairFading& pf, const ChannelParams& params, const Positions& pos) {
  const auto count = static_cast<Eigen::Index>(active.size());
  Eigen::Matrix2Xd tx_pos(2, count);
  Eigen::ArrayXd fade(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const NodeId t = active[static_cast<std::size_t>(k)];
    tx_pos.col(k) = pos.col(t);
    fade(k) = (t == tx || t == rx) ? 0.0 : pf(t, rx);
  }
  const Eigen::ArrayXd d2 = (tx_pos.colwise() - pos.col(rx)).colwise().squaredNorm().array();
  if ((fade > 0.0 && d2 == 0.0).any()) throw std::domain_error("interference: coincident positions");
  const Eigen::ArrayXd g = (fade > 0.0).select(fade * d2.pow(-params.alpha / 2.0), 0.0);
  return params.K * params.P0 * g.sum();
}

double sinr(NodeId rx, NodeId tx, std::span<const NodeId> active, const PairFading& pf,
            const ChannelParams& params, const Positions& pos) {
  if (std::find(active.begin(), active.end(), tx) == active.end()) {
    throw std::invalid_argument("sinr: transmitter is not in the active set");
  }
  if (std::find(active.begin(), active.end(), rx) != active.end()) {
    throw std::invalid_argument("sinr: receiver is transmitting");
  }
  const double signal = gain(pf, params, tx, rx, pos) * params.P0;
  return signal / (params.eta + interference_at(rx, tx, active, pf, params, pos));
}

double rate(double gamma, const ChannelParams& params) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("rate: SINR must be nonnegative");
  return params.W * std::log2(1.0 + gamma / params.Gamma);
}

double gamma_min(double n, const FadingModel& model, const ChannelParams& params) {
  if (!(params.alpha > 2.0)) throw std::invalid_argument("gamma_min: alpha must exceed 2");
  if (!(n > 1.0)) throw std::invalid_argument("gamma_min: n must exceed 1");
  return sinr_floor(n, params.alpha, model.q, model.f_m);
}

double interference_upper_bound(double n, const Lattice& lat, const FadingModel& model,
                                const ChannelParams& params) {
  params.validate();
  return interference_ceiling(n, lat.side(), params.alpha, model.q, params.K, params.P0);
}

}  // namespace capscale
