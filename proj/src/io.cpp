#include "capscale/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <system_error>

#ifndef CAPSCALE_VERSION
#define CAPSCALE_VERSION "0.0.0"
#endif

namespace capscale {

std::string_view artifact_version() { return CAPSCALE_VERSION; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::string provenance_line(const Json& config) {
  return "capscale " + std::string(artifact_version()) + " config " + hex64(config_hash(config)) +
         " " + config.dump();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const ChannelParams& p) {
  return Json{{"K", p.K}, {"alpha", p.alpha}, {"eta", p.eta},
              {"P0", p.P0}, {"W", p.W},       {"gamma_cap", p.Gamma}};
}

Json to_json(const BoundReport& rep) {
  Json j{{"model", to_string(rep.model)},
         {"n", rep.n},
         {"d", rep.d},
         {"params", to_json(rep.params)},
         {"fading", rep.fading},
         {"lower", rep.lower},
         {"upper", rep.upper ? Json(*rep.upper) : Json(nullptr)}};
  j["components"] = Json::object();
  for (const auto& [k, v] : rep.components) j["components"][k] = v;
  return j;
}

Json to_json(const Route& route) {
  Json hops = Json::array();
  for (const Hop& h : route.hops) {
    hops.push_back({{"tx", h.tx}, {"rx", h.rx}, {"leg", to_string(h.leg)}, {"degraded", h.degraded}});
  }
  Json cells = Json::array();
  for (const CellCoord& c : route.cells_crossed) cells.push_back({c.v1, c.v2});
  return {{"stream", route.stream}, {"hops", hops}, {"cells", cells}};
}

Json to_json(const NetworkInstance& inst) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < inst.node_count(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    nodes.push_back({{"id", i},
                     {"x", inst.positions(0, c)},
                     {"y", inst.positions(1, c)},
                     {"role", to_string(inst.roles[i])}});
  }
  Json demands = Json::array();
  for (const Demand& dm : inst.demands) {
    Json dst = Json::array();
    for (const NodeId v : dm.destinations) dst.push_back(v == kAnyHead ? Json("any-head") : Json(v));
    demands.push_back({{"stream", dm.stream},
                       {"source", dm.source == kAnyHead ? Json("any-head") : Json(dm.source)},
                       {"destinations", dst}});
  }
  return {{"model", to_string(inst.model)},
          {"n", inst.n},
          {"m", inst.m},
          {"d", inst.d},
          {"seed", inst.seed},
          {"fading", inst.fading.model().name()},
          {"fading_seed", inst.fading.seed()},
          {"params", to_json(inst.params)},
          {"nodes", nodes},
          {"demands", demands}};
}

namespace {

Json opt(const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); }

std::string opt_csv(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : ""; }

}  // namespace

Json to_json(const TrialSummary& t) {
  return {{"n", t.n},
          {"trial", t.trial},
          {"seed", t.seed},
          {"error", t.error},
          {"claims",
           {{"eq10", opt(t.eq10)},
            {"eq11", opt(t.eq11)},
            {"eq12", opt(t.eq12)},
            {"eq13", opt(t.eq13)},
            {"eq20", opt(t.eq20)},
            {"eq21", opt(t.eq21)},
            {"lemma2", opt(t.lemma2)},
            {"lemma7", opt(t.lemma7)},
            {"eq17", opt(t.eq17)},
            {"load_ceiling", opt(t.load_ceiling)},
            {"sinr_floor", opt(t.sinr_floor)}}},
          {"max_streams", t.max_streams},
          {"max_receptions", t.max_receptions},
          {"max_fading", t.max_fading},
          {"fading_subsampled", t.fading_subsampled},
          {"aggregate", t.aggregate},
          {"aggregate_formula", t.aggregate_formula},
          {"hops", t.hops},
          {"degraded_hops", t.degraded_hops},
          {"floor_fraction", t.floor_fraction ? Json(*t.floor_fraction) : Json(nullptr)}};
}

Json to_json(const ScalingFit& fit) {
  Json pts = Json::array();
  for (const auto& [n, a] : fit.points) pts.push_back({n, a});
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"points", pts}};
}

Json to_json(const FloorStats& fs) {
  return {{"clean", fs.clean},
          {"clean_above", fs.clean_above},
          {"degraded", fs.degraded},
          {"degraded_above", fs.degraded_above},
          {"fraction", fs.fraction()}};
}

Json to_json(const Throughput& t) {
  return {{"rate", t.rate},
          {"divisor", t.divisor},
          {"per_stream", t.per_stream},
          {"streams", t.streams},
          {"aggregate", t.aggregate}};
}

Json to_json(const ClaimFrequency& c) {
  return {{"claim", c.claim}, {"held", c.held}, {"evaluated", c.evaluated}, {"frequency", c.frequency()}};
}

void CsvWriter::comment(std::string_view line) { os_ << "# " << line << "\n"; }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      os_ << f;
      continue;
    }
    os_ << '"';
    for (const char c : f) {
      if (c == '"') os_ << '"';
      os_ << c;
    }
    os_ << '"';
  }
  os_ << "\n";
}

void write_hops_csv(std::ostream& os, std::span<const Route> routes, const NetworkInstance& inst,
                    const Json& config) {
  CsvWriter w(os);
  w.comment(provenance_line(config));
  w.row({"stream", "hop", "tx", "rx", "leg", "degraded", "tx_x", "tx_y", "rx_x", "rx_y"});
  for (const Route& r : routes) {
    for (std::size_t k = 0; k < r.hops.size(); ++k) {
      const Hop& h = r.hops[k];
      w.row({std::to_string(r.stream), std::to_string(k), std::to_string(h.tx), std::to_string(h.rx),
             std::string(to_string(h.leg)), h.degraded ? "1" : "0",
             format_number(inst.positions(0, h.tx)), format_number(inst.positions(1, h.tx)),
             format_number(inst.positions(0, h.rx)), format_number(inst.positions(1, h.rx))});
    }
  }
}

void write_transmissions_csv(std::ostream& os, std::span<const TransmissionRecord> records,
                             const Json& config) {
  CsvWriter w(os);
  w.comment(provenance_line(config));
  w.row({"tx", "rx", "stream", "slot", "step", "gamma", "interference", "rate", "success", "degraded"});
  for (const TransmissionRecord& r : records) {
    w.row({std::to_string(r.tx), std::to_string(r.rx), std::to_string(r.stream), std::to_string(r.slot),
           std::to_string(r.step), format_number(r.gamma), format_number(r.interference),
           format_number(r.rate), r.success ? "1" : "0", r.degraded ? "1" : "0"});
  }
}

void write_bounds_csv(std::ostream& os, std::span<const BoundReport> reports, const Json& config) {
  CsvWriter w(os);
  w.comment(provenance_line(config));
  w.row({"model", "n", "d", "alpha", "W", "gamma_cap", "fading", "lower", "upper", "components"});
  for (const BoundReport& r : reports) {
    std::string comps;
    for (const auto& [k, v] : r.components) {
      if (!comps.empty()) comps += ';';
      comps += k + "=" + format_number(v);
    }
    w.row({std::string(to_string(r.model)), format_number(r.n), format_number(r.d),
           format_number(r.params.alpha), format_number(r.params.W), format_number(r.params.Gamma),
           r.fading, format_number(r.lower), r.upper ? format_number(*r.upper) : "", comps});
  }
}

void write_trials_csv(std::ostream& os, std::span<const TrialSummary> trials, const Json& config) {
  CsvWriter w(os);
  w.comment(provenance_line(config));
  w.row({"n", "trial", "seed", "error", "eq10", "eq11", "eq12", "eq13", "eq20", "eq21", "lemma2",
         "lemma7", "eq17", "load_ceiling", "sinr_floor", "max_streams", "max_receptions",
         "max_fading", "aggregate", "aggregate_formula", "hops", "degraded_hops", "floor_fraction"});
  for (const TrialSummary& t : trials) {
    w.row({std::to_string(t.n), std::to_string(t.trial), std::to_string(t.seed), t.error,
           opt_csv(t.eq10), opt_csv(t.eq11), opt_csv(t.eq12), opt_csv(t.eq13), opt_csv(t.eq20),
           opt_csv(t.eq21), opt_csv(t.lemma2), opt_csv(t.lemma7), opt_csv(t.eq17),
           opt_csv(t.load_ceiling), opt_csv(t.sinr_floor), std::to_string(t.max_streams),
           std::to_string(t.max_receptions), format_number(t.max_fading), format_number(t.aggregate),
           format_number(t.aggregate_formula), std::to_string(t.hops), std::to_string(t.degraded_hops),
           t.floor_fraction ? format_number(*t.floor_fraction) : ""});
  }
}

}  // namespace capscale
