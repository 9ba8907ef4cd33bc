#include "capscale/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

namespace capscale {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (!d) throw ConfigError("missing required option --d");
  if (!(*d > 0.0 && *d < 1.0)) throw ConfigError("--d must lie in (0,1)");
  if (n_grid.empty()) throw ConfigError("missing required option --n");
  for (const std::size_t n : n_grid) {
    if (n < 3) throw ConfigError("every --n value must be >= 3");
  }
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  if (workers < 1) throw ConfigError("--workers must be >= 1");
  for (const std::string& f : formats) {
    if (f != "csv" && f != "json") throw ConfigError("--format accepts csv and json only");
  }
  try {
    (void)FadingModel::from_name(fading);
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

bool ExperimentConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

Json ExperimentConfig::canonical() const {
  return {{"command", command},
          {"model", to_string(model)},
          {"d", d ? Json(*d) : Json(nullptr)},
          {"n", n_grid},
          {"trials", trials},
          {"fading", fading},
          {"params", to_json(params)},
          {"seed", seed},
          {"simulate", simulate}};
}

void apply_config_json(const Json& j, ExperimentConfig& cfg) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") cfg.model = traffic_model_from_string(v.get<std::string>());
      else if (key == "d") cfg.d = v.get<double>();
      else if (key == "n") cfg.n_grid = v.is_array() ? v.get<std::vector<std::size_t>>()
                                                     : std::vector<std::size_t>{v.get<std::size_t>()};
      else if (key == "trials") cfg.trials = v.get<std::size_t>();
      else if (key == "fading") cfg.fading = v.get<std::string>();
      else if (key == "alpha") cfg.params.alpha = v.get<double>();
      else if (key == "W") cfg.params.W = v.get<double>();
      else if (key == "gamma_cap") cfg.params.Gamma = v.get<double>();
      else if (key == "K") cfg.params.K = v.get<double>();
      else if (key == "eta") cfg.params.eta = v.get<double>();
      else if (key == "P0") cfg.params.P0 = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "format") cfg.formats = v.is_array() ? v.get<std::vector<std::string>>()
                                                           : std::vector<std::string>{v.get<std::string>()};
      else if (key == "workers") cfg.workers = v.get<unsigned>();
      else if (key == "strict") cfg.strict = v.get<bool>();
      else if (key == "simulate") cfg.simulate = v.get<bool>();
      else throw ConfigError("unknown config key: " + key);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

// ---------------------------------------------------------------------------
// Output helpers

class Artifacts {
 public:
  explicit Artifacts(const ExperimentConfig& cfg) : dir_(cfg.out) {}

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return f;
  }

  void json(const std::string& name, const Json& j) { open(name) << dump(j); }

 private:
  fs::path dir_;
};

std::string run_prefix(std::size_t n, std::size_t t) {
  return "run_n" + std::to_string(n) + "_t" + std::to_string(t);
}

FadingModel fading_of(const ExperimentConfig& cfg) { return FadingModel::from_name(cfg.fading); }

Json plan_json(const ExperimentConfig& cfg, const std::vector<std::string>& outputs) {
  return {{"dry_run", true},
          {"config", cfg.canonical()},
          {"config_hash", hex64(config_hash(cfg.canonical()))},
          {"work_items", cfg.n_grid.size() * cfg.trials},
          {"workers", cfg.workers},
          {"out", cfg.out},
          {"outputs", outputs}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Json config = cfg.canonical();
  if (cfg.dry_run) {
    std::vector<std::string> files;
    for (const std::size_t n : cfg.n_grid) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        if (cfg.wants("csv")) {
          files.push_back(run_prefix(n, t) + "_hops.csv");
          files.push_back(run_prefix(n, t) + "_transmissions.csv");
        }
        if (cfg.wants("json")) files.push_back(run_prefix(n, t) + "_instance.json");
      }
    }
    if (cfg.wants("json")) files.push_back("run_summary.json");
    out << dump(plan_json(cfg, files));
    return kExitOk;
  }

  const FadingModel fading = fading_of(cfg);
  Artifacts art(cfg);
  std::vector<std::pair<std::size_t, std::size_t>> items;
  for (const std::size_t n : cfg.n_grid) {
    for (std::size_t t = 0; t < cfg.trials; ++t) items.emplace_back(n, t);
  }
  std::vector<Json> summaries(items.size());
  // Trials write distinct files, so they run in parallel.
  parallel_for(items.size(), cfg.workers, [&](std::size_t k) {
    const auto [n, t] = items[k];
    const std::uint64_t seed = trial_seed(cfg.seed, n, t);
    const NetworkInstance inst = generate(cfg.model, n, *cfg.d, seed, cfg.params, fading);
    const RoutingPlan plan = route_instance(inst, HybridMode::kAdhoc);
    const CellLoad load = cell_loads(plan.routes, plan.lattice, inst);
    const Frame frame = build_frame(plan.routes, plan.lattice, inst);
    const auto records = simulate_frame(frame, inst);
    const double floor = gamma_min(static_cast<double>(n), fading, cfg.params);

    Json s{{"n", n},
           {"trial", t},
           {"seed", seed},
           {"m", inst.m},
           {"lattice_side", plan.lattice.r()},
           {"gamma_min", floor},
           {"floor", to_json(floor_stats(records, floor))},
           {"max_streams", load.max_streams()},
           {"max_receptions", load.max_receptions()},
           {"routes", plan.routes.size()},
           {"receptions", frame.size()}};
    if (cfg.model == TrafficModel::kHybrid) {
      const HybridThroughput f = throughput_hybrid(inst, ThroughputMode::kFormula);
      const HybridThroughput m = throughput_hybrid(inst, ThroughputMode::kMeasured);
      s["throughput"] = {{"formula", {{"infrastructure", f.infrastructure}, {"adhoc", f.adhoc}, {"best", f.best}}},
                         {"measured", {{"infrastructure", m.infrastructure}, {"adhoc", m.adhoc}, {"best", m.best}}}};
    } else {
      Json formula = nullptr;
      try {
        formula = to_json(throughput(inst, ThroughputMode::kFormula));
      } catch (const RegimeBoundaryError&) {
      }
      s["throughput"] = {{"formula", formula}, {"measured", to_json(throughput(inst, ThroughputMode::kMeasured, &load))}};
    }

    const Json item_config = [&] {
      Json c = config;
      c["trial"] = t;
      c["n_item"] = n;
      return c;
    }();
    if (cfg.wants("csv")) {
      auto hops = art.open(run_prefix(n, t) + "_hops.csv");
      write_hops_csv(hops, plan.routes, inst, item_config);
      auto tx = art.open(run_prefix(n, t) + "_transmissions.csv");
      write_transmissions_csv(tx, records, item_config);
    }
    if (cfg.wants("json")) {
      Json j = to_json(inst);
      j["config"] = item_config;
      art.json(run_prefix(n, t) + "_instance.json", j);
    }
    summaries[k] = std::move(s);
  });

  const Json report{{"config", config},
                    {"config_hash", hex64(config_hash(config))},
                    {"version", artifact_version()},
                    {"runs", summaries}};
  if (cfg.wants("json")) art.json("run_summary.json", report);
  for (const Json& s : summaries) {
    out << "n=" << s["n"].get<std::size_t>() << " trial=" << s["trial"].get<std::size_t>()
        << " floor_fraction=" << format_number(s["floor"]["fraction"].get<double>())
        << " max_receptions=" << s["max_receptions"].get<int>() << "\n";
  }
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Json config = cfg.canonical();
  if (cfg.dry_run) {
    std::vector<std::string> files;
    if (cfg.wants("csv")) files.push_back("verify_trials.csv");
    if (cfg.wants("json")) files.push_back("verify_report.json");
    out << dump(plan_json(cfg, files));
    return kExitOk;
  }
  const FadingModel fading = fading_of(cfg);
  CampaignConfig camp;
  camp.model = cfg.model;
  camp.d = *cfg.d;
  camp.n_grid = cfg.n_grid;
  camp.trials = cfg.trials;
  camp.params = cfg.params;
  camp.fading = fading;
  camp.seed = cfg.seed;
  camp.workers = cfg.workers;
  camp.simulate = true;
  const CampaignResult res = run_campaign(camp);

  struct Line {
    std::string claim;
    std::size_t n;
    double frequency;
    std::optional<double> threshold;  // none: reported only
  };
  std::vector<Line> lines;
  Json per_n = Json::array();
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const std::size_t n = cfg.n_grid[g];
    const std::span<const TrialSummary> trials(res.trials.data() + g * cfg.trials, cfg.trials);
    const double cells = static_cast<double>(build_lattice(static_cast<double>(n)).cell_count());
    const Lemma1Result l1 = verify_lemma1(cfg.trials, n, static_cast<std::size_t>(cells), 0.5,
                                          derive_seed(cfg.seed, 0x11), cfg.workers);
    const Lemma2Result l2 = verify_lemma2(cfg.trials, n, fading, derive_seed(cfg.seed, 0x12),
                                          kDefaultPairBudget, cfg.workers);
    lines.push_back({"lemma1", n, l1.frequency, std::max(0.0, l1.bound - 3.0 * l1.sigma)});
    lines.push_back({"lemma2", n, l2.frequency, 0.99});

    std::size_t clean = 0, above = 0;
    for (const TrialSummary& t : trials) {
      clean += t.floor_clean;
      above += t.floor_above;
    }
    const double pooled = clean ? static_cast<double>(above) / static_cast<double>(clean) : 1.0;
    lines.push_back({"sinr_floor_pooled", n, pooled, 0.99});
    Json claims = Json::array();
    for (const ClaimFrequency& c : claim_frequencies(trials)) {
      claims.push_back(to_json(c));
      if (c.claim == "load_ceiling") {
        lines.push_back({c.claim, n, c.frequency(), 0.95});
      } else if (c.claim != "sinr_floor" && c.claim != "lemma2") {
        lines.push_back({c.claim, n, c.frequency(), std::nullopt});
      }
    }
    per_n.push_back({{"n", n},
                     {"lemma1", {{"m", cells}, {"eps", 0.5}, {"frequency", l1.frequency}, {"bound", l1.bound}, {"sigma", l1.sigma}}},
                     {"lemma2", {{"frequency", l2.frequency}, {"threshold", l2.threshold}, {"max_fading", l2.max_fading}, {"subsampled", l2.subsampled}}},
                     {"sinr_floor_pooled", pooled},
                     {"claims", claims}});
  }

  bool all_met = true;
  Json table = Json::array();
  for (const Line& l : lines) {
    const bool met = !l.threshold || l.frequency >= *l.threshold;
    if (l.threshold && !met) all_met = false;
    const std::string status = !l.threshold ? "info" : (met ? "PASS" : "FAIL");
    out << l.claim << " n=" << l.n << " frequency=" << format_number(l.frequency)
        << " threshold=" << (l.threshold ? format_number(*l.threshold) : "-") << " " << status << "\n";
    table.push_back({{"claim", l.claim}, {"n", l.n}, {"frequency", l.frequency},
                     {"threshold", l.threshold ? Json(*l.threshold) : Json(nullptr)}, {"status", status}});
  }
  Artifacts art(cfg);
  if (cfg.wants("csv")) {
    auto f = art.open("verify_trials.csv");
    write_trials_csv(f, res.trials, config);
  }
  if (cfg.wants("json")) {
    art.json("verify_report.json", {{"config", config},
                                    {"config_hash", hex64(config_hash(config))},
                                    {"version", artifact_version()},
                                    {"per_n", per_n},
                                    {"table", table},
                                    {"all_thresholds_met", all_met}});
  }
  return cfg.strict && !all_met ? kExitStrict : kExitOk;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Json config = cfg.canonical();
  if (cfg.dry_run) {
    std::vector<std::string> files;
    if (cfg.wants("csv")) files.push_back("bounds.csv");
    if (cfg.wants("json")) files.push_back("bounds.json");
    out << dump(plan_json(cfg, files));
    return kExitOk;
  }
  const FadingModel fading = fading_of(cfg);
  std::vector<BoundReport> reports;
  for (const std::size_t n : cfg.n_grid) {
    reports.push_back(bound_report(cfg.model, static_cast<double>(n), *cfg.d, cfg.params, fading));
  }
  write_bounds_csv(out, reports, config);
  Artifacts art(cfg);
  if (cfg.wants("csv")) {
    auto f = art.open("bounds.csv");
    write_bounds_csv(f, reports, config);
  }
  if (cfg.wants("json")) {
    Json rows = Json::array();
    for (const BoundReport& r : reports) rows.push_back(to_json(r));
    art.json("bounds.json", {{"config", config}, {"config_hash", hex64(config_hash(config))},
                             {"version", artifact_version()}, {"reports", rows}});
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Json config = cfg.canonical();
  if (cfg.dry_run) {
    std::vector<std::string> files;
    if (cfg.wants("csv")) {
      files.push_back("sweep.csv");
      files.push_back("sweep_trials.csv");
    }
    if (cfg.wants("json")) files.push_back("sweep.json");
    out << dump(plan_json(cfg, files));
    return kExitOk;
  }
  const FadingModel fading = fading_of(cfg);
  CampaignConfig camp;
  camp.model = cfg.model;
  camp.d = *cfg.d;
  camp.n_grid = cfg.n_grid;
  camp.trials = cfg.trials;
  camp.params = cfg.params;
  camp.fading = fading;
  camp.seed = cfg.seed;
  camp.workers = cfg.workers;
  camp.simulate = cfg.simulate;
  const CampaignResult res = run_campaign(camp);

  std::ostringstream table;
  CsvWriter w(table);
  w.comment(provenance_line(config));
  if (res.fit) {
    w.comment("fit slope " + format_number(res.fit->slope) + " intercept " +
              format_number(res.fit->intercept) + " residual " + format_number(res.fit->residual));
  }
  w.row({"n", "trials", "ok", "aggregate_mean", "aggregate_min", "aggregate_max", "aggregate_formula",
         "bound_lower", "bound_upper"});
  Json per_n = Json::array();
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const std::size_t n = cfg.n_grid[g];
    double sum = 0.0, lo = 0.0, hi = 0.0, formula = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const TrialSummary& s = res.trials[g * cfg.trials + t];
      if (!s.error.empty()) continue;
      lo = ok ? std::min(lo, s.aggregate) : s.aggregate;
      hi = ok ? std::max(hi, s.aggregate) : s.aggregate;
      sum += s.aggregate;
      formula = s.aggregate_formula;
      ++ok;
    }
    const double mean = ok ? sum / static_cast<double>(ok) : 0.0;
    std::optional<BoundReport> b;
    try {
      b = bound_report(cfg.model, static_cast<double>(n), *cfg.d, cfg.params, fading);
    } catch (const RegimeBoundaryError&) {
    }
    w.row({std::to_string(n), std::to_string(cfg.trials), std::to_string(ok), format_number(mean),
           format_number(lo), format_number(hi), format_number(formula),
           b ? format_number(b->lower) : "", b && b->upper ? format_number(*b->upper) : ""});
    per_n.push_back({{"n", n}, {"trials", cfg.trials}, {"ok", ok}, {"aggregate_mean", mean},
                     {"aggregate_formula", formula}, {"bounds", b ? to_json(*b) : Json(nullptr)}});
  }
  out << table.str();

  Artifacts art(cfg);
  if (cfg.wants("csv")) {
    art.open("sweep.csv") << table.str();
    auto f = art.open("sweep_trials.csv");
    write_trials_csv(f, res.trials, config);
  }
  if (cfg.wants("json")) {
    Json claims = Json::array();
    for (const ClaimFrequency& c : res.claims) claims.push_back(to_json(c));
    art.json("sweep.json", {{"config", config},
                            {"config_hash", hex64(config_hash(config))},
                            {"version", artifact_version()},
                            {"fit", res.fit ? to_json(*res.fit) : Json(nullptr)},
                            {"claims", claims},
                            {"per_n", per_n}});
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point

namespace {

void report_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << Json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacity scaling simulator for wireless multihop networks", "capscale"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, model, fading, out_dir;
  std::vector<std::size_t> n_grid;
  std::vector<std::string> formats;
  double d = 0, alpha = 0, W = 0, gamma_cap = 0, K = 0, eta = 0, P0 = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool strict = false, dry_run = false, simulate = false;

  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  auto* o_model = app.add_option("--model", model, "asymmetric | multicast | cluster | hybrid");
  auto* o_n = app.add_option("--n", n_grid, "node count or comma-separated grid")->delimiter(',');
  auto* o_d = app.add_option("--d", d, "secondary exponent in (0,1)");
  auto* o_trials = app.add_option("--trials", trials, "trials per grid point");
  auto* o_seed = app.add_option("--seed", seed, "campaign seed");
  auto* o_fading = app.add_option("--fading", fading, "trivial | rayleigh | nakagami-<m> | ricean-<K>");
  auto* o_alpha = app.add_option("--alpha", alpha, "decay exponent (> 2)");
  auto* o_W = app.add_option("--W", W, "bandwidth");
  auto* o_gamma = app.add_option("--gamma-cap", gamma_cap, "SINR gap (>= 1)");
  auto* o_K = app.add_option("--K", K, "gain constant");
  auto* o_eta = app.add_option("--eta", eta, "noise power");
  auto* o_P0 = app.add_option("--P0", P0, "transmit power");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_format = app.add_option("--format", formats, "csv,json")->delimiter(',');
  auto* o_workers = app.add_option("--workers", workers, "parallel trial cap");
  auto* o_strict = app.add_flag("--strict", strict, "verify: exit 3 when a threshold is missed");
  auto* o_dry = app.add_flag("--dry-run", dry_run, "print the plan without computing");
  auto* o_sim = app.add_flag("--simulate", simulate, "sweep: also simulate frames");

  app.add_subcommand("run", "generate, route, schedule and simulate instances");
  app.add_subcommand("verify", "claim frequencies against analytic thresholds");
  app.add_subcommand("bounds", "closed-form bound table over the n grid");
  app.add_subcommand("sweep", "scaling campaign with fitted exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  ExperimentConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config file " + config_path);
      Json j;
      try {
        f >> j;
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
      }
      apply_config_json(j, cfg);
    }
    if (o_model->count()) {
      try {
        cfg.model = traffic_model_from_string(model);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (o_n->count()) cfg.n_grid = n_grid;
    if (o_d->count()) cfg.d = d;
    if (o_trials->count()) cfg.trials = trials;
    if (o_seed->count()) cfg.seed = seed;
    if (o_fading->count()) cfg.fading = fading;
    if (o_alpha->count()) cfg.params.alpha = alpha;
    if (o_W->count()) cfg.params.W = W;
    if (o_gamma->count()) cfg.params.Gamma = gamma_cap;
    if (o_K->count()) cfg.params.K = K;
    if (o_eta->count()) cfg.params.eta = eta;
    if (o_P0->count()) cfg.params.P0 = P0;
    if (o_out->count()) cfg.out = out_dir;
    if (o_format->count()) cfg.formats = formats;
    if (o_workers->count()) cfg.workers = workers;
    if (o_strict->count()) cfg.strict = strict;
    if (o_dry->count()) cfg.dry_run = dry_run;
    if (o_sim->count()) cfg.simulate = simulate;
    cfg.validate();

    if (cfg.command == "run") return cmd_run(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    if (cfg.command == "bounds") return cmd_bounds(cfg, out);
    return cmd_sweep(cfg, out);
  } catch (const ConfigError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const RegimeBoundaryError& e) {
    report_error(err, "regime-boundary", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitRuntime;
  }
}

}  // namespace capscale
