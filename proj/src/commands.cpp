#include "cqamc/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "cqamc/errors.hpp"
#include "cqamc/fixtures.hpp"
#include "cqamc/qamc.hpp"

namespace cqamc {
namespace {

namespace fs = std::filesystem;

void note(const RunOptions& opt, const std::string& msg) {
  if (opt.log) *opt.log << msg << '\n';
}

fs::path prepare_out(const RunOptions& opt) {
  fs::create_directories(opt.out);
  return opt.out;
}

std::vector<OptionQuote> read_config_quotes(const RunOptions& opt) {
  if (!opt.config.quotes) throw ValidationError("config has no 'quotes' path");
  return read_quotes_file(*opt.config.quotes);
}

double spot_of(const AppConfig& cfg, const std::string& name) {
  const auto it = cfg.spots.find(name);
  if (it == cfg.spots.end()) throw ValidationError("config.spots has no entry for " + name);
  return it->second;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

// Violations per group; with drop, the cleaned groups replace the input.
struct ArbReport {
  Json json = {{"groups", Json::array()}};
  std::size_t remaining = 0;
  std::vector<QuoteGroup> groups;
};

ArbReport arbitrage_report(std::vector<QuoteGroup> groups, bool drop) {
  ArbReport rep;
  for (auto& g : groups) {
    Json entry = {{"underlying", g.underlying}, {"expiry_years", g.expiry}};
    const auto found = check_arbitrage(g.quotes);
    entry["violations"] = Json::array();
    for (const auto& v : found) entry["violations"].push_back(violation_json(v));
    entry["dropped"] = Json::array();
    if (drop && !found.empty()) {
      for (const auto& q : drop_violations(g.quotes))
        entry["dropped"].push_back({{"strike", q.strike}, {"kind", to_string(q.kind)}, {"mid", q.mid()}});
    } else {
      rep.remaining += found.size();
    }
    rep.json["groups"].push_back(entry);
    rep.groups.push_back(std::move(g));
  }
  return rep;
}

std::vector<CalibratedAsset> read_calibration(const fs::path& out) {
  const Json j = read_json_file(out / "calibration.json");
  std::vector<CalibratedAsset> assets;
  for (const auto& e : j.at("assets")) assets.push_back(calibrated_asset_from_json(e));
  if (assets.empty()) throw ValidationError("calibration.json has no assets");
  return assets;
}

std::map<std::string, Json> read_curves(const fs::path& out) {
  const Json j = read_json_file(out / "curves.json");
  std::map<std::string, Json> m;
  for (const auto& e : j.at("curves")) m[e.at("underlying").get<std::string>()] = e;
  return m;
}

MultiAssetModel model_from_artifacts(const RunOptions& opt) {
  const auto calibrated = read_calibration(opt.out);
  const auto curves = read_curves(opt.out);
  const AppConfig& cfg = opt.config;
  std::vector<std::string> names = cfg.price.assets;
  if (names.empty())
    for (const auto& a : calibrated) names.push_back(a.underlying);

  MultiAssetModel model;
  for (const auto& name : names) {
    const auto it = std::find_if(calibrated.begin(), calibrated.end(),
                                 [&](const CalibratedAsset& a) { return a.underlying == name; });
    if (it == calibrated.end()) throw ValidationError("no calibrated parameters for " + name);
    const auto c = curves.find(name);
    if (c == curves.end()) throw ValidationError("no curves for " + name);
    if (!calibrated.empty() && it->expiry != calibrated.front().expiry)
      throw ValidationError("pricing needs a common expiry; " + name + " differs");
    const MarketSlice slice = MarketSlice::from_rates(name, spot_of(cfg, name), it->expiry,
                                                      c->second.at("r").get<double>(), c->second.at("q").get<double>());
    model.assets.push_back(make_marginal(name, ExpNIGModel{it->params, slice}, cfg.density));
    if (model.assets.size() == 1) model.discount_factor = slice.discount_factor;
  }

  if (cfg.correlation) {
    const CopulaSpec& full = *cfg.correlation;
    const auto n = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd sigma(n, n);
    std::vector<Eigen::Index> idx;
    for (const auto& name : names) {
      const auto it = std::find(full.assets.begin(), full.assets.end(), name);
      if (it == full.assets.end()) throw ValidationError("correlation matrix has no row for " + name);
      idx.push_back(static_cast<Eigen::Index>(it - full.assets.begin()));
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        sigma(i, k) = full.sigma(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(k)]);
    model.copula = CopulaSpec::from_matrix(sigma, names);
  } else {
    model.copula = CopulaSpec::from_matrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(names.size()),
                                                                     static_cast<Eigen::Index>(names.size())),
                                           names);
  }
  return model;
}

}  // namespace

int cmd_ingest(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  const auto groups = group_quotes(read_config_quotes(opt));
  Json j = {{"groups", Json::array()}};
  for (const auto& g : groups) {
    std::size_t calls = 0;
    for (const auto& q : g.quotes) calls += q.kind == OptionKind::call;
    j["groups"].push_back({{"underlying", g.underlying},
                           {"expiry_years", g.expiry},
                           {"quotes", g.quotes.size()},
                           {"calls", calls},
                           {"puts", g.quotes.size() - calls}});
  }
  write_json_file(dir / "ingest.json", j);
  note(opt, "ingest: " + std::to_string(groups.size()) + " group(s)");
  return 0;
}

int cmd_curves(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  Json j = {{"curves", Json::array()}};
  for (const auto& g : group_quotes(read_config_quotes(opt))) {
    const Curves c = strip_curves(g.quotes, spot_of(opt.config, g.underlying), g.expiry);
    j["curves"].push_back(curves_json(g.underlying, g.expiry, c));
  }
  write_json_file(dir / "curves.json", j);
  note(opt, "curves: " + std::to_string(j["curves"].size()) + " slice(s)");
  return 0;
}

int cmd_arb_check(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  const ArbReport rep = arbitrage_report(group_quotes(read_config_quotes(opt)), opt.drop_violations);
  write_json_file(dir / "arbitrage.json", rep.json);
  if (opt.drop_violations) {
    std::vector<OptionQuote> clean;
    for (const auto& g : rep.groups) clean.insert(clean.end(), g.quotes.begin(), g.quotes.end());
    auto out = open_out(dir / "quotes_clean.csv");
    write_quotes(out, clean);
  }
  if (rep.remaining > 0) {
    note(opt, "arb-check: " + std::to_string(rep.remaining) + " violation(s); rerun with --drop-violations to remove");
    return kArbitrageExit;
  }
  note(opt, "arb-check: clean");
  return 0;
}

int cmd_calibrate(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  auto groups = group_quotes(read_config_quotes(opt));
  if (opt.drop_violations) groups = arbitrage_report(std::move(groups), true).groups;
  Json j = {{"assets", Json::array()}};
  for (const auto& g : groups) {
    const MarketSlice slice = build_slice(g, spot_of(opt.config, g.underlying));
    const CalibrationResult r = calibrate(slice, opt.config.calibration);
    j["assets"].push_back(calibration_json(g.underlying, g.expiry, r, opt.config.calibration.lambda));
    note(opt, "calibrate: " + g.underlying + " rmse " + std::to_string(r.rmse_bp) + " bp");
  }
  write_json_file(dir / "calibration.json", j);
  return 0;
}

int cmd_density(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  Json index = {{"series", Json::array()}};
  for (const auto& a : read_calibration(dir)) {
    const Interval iv = marginal_interval(a.params, a.expiry, opt.config.density.tail_epsilon, opt.config.density.rule);
    const CosineSeries s = coeffs_nig(a.params, a.expiry, iv, opt.config.density.terms);
    const std::string file = "series_" + a.underlying + ".json";
    write_json_file(dir / file, series_json(s));
    const auto err = nig_series_error(s, a.params, a.expiry);
    index["series"].push_back({{"underlying", a.underlying},
                               {"file", file},
                               {"terms", s.terms()},
                               {"pdf_sup_error", err.pdf_sup},
                               {"cdf_sup_error", err.cdf_sup}});

    auto csv = open_out(dir / ("density_" + a.underlying + ".csv"));
    csv.precision(17);
    csv << "x,pdf,cdf\n";
    constexpr std::size_t kPoints = 401;
    std::vector<double> x(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i)
      x[i] = iv.a + iv.width() * static_cast<double>(i) / static_cast<double>(kPoints - 1);
    x.back() = std::nextafter(iv.b, iv.a);
    const auto f = cosine_eval(s.coeffs, iv, x, opt.exec);
    const auto F = cosine_eval_cdf(s.coeffs, iv, x, opt.exec);
    for (std::size_t i = 0; i < kPoints; ++i) csv << x[i] << ',' << f[i] << ',' << F[i] << '\n';
  }
  write_json_file(dir / "density.json", index);
  note(opt, "density: " + std::to_string(index["series"].size()) + " series");
  return 0;
}

int cmd_price(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  const AppConfig& cfg = opt.config;
  const MultiAssetModel model = model_from_artifacts(opt);
  const Payoff& payoff = cfg.price.payoff;
  const PricingGrid grid = PricingGrid::on_quantiles(model, cfg.price.qubits, cfg.price.grid_tail);
  const GridLaw law = discretize(model, grid, payoff, opt.exec, cfg.price.cell_mass);

  Json j;
  j["assets"] = Json::array();
  for (const auto& a : model.assets) j["assets"].push_back(a.name);
  j["grid"] = {{"qubits_per_dim", cfg.price.qubits},
               {"grid_tail", cfg.price.grid_tail},
               {"cell_mass", to_string(cfg.price.cell_mass)},
               {"joint_mass", law.joint_total()},
               {"c_max", law.c_max},
               {"payoff_max", law.payoff_max},
               {"clipped_mass", law.clipped_mass}};
  j["estimates"] = Json::array();

  PriceEstimate ref;
  ref.value = riemann_reference(law);
  ref.estimator = "riemann";
  ref.samples_or_queries = law.grid.total();
  j["estimates"].push_back(price_json(payoff, Formulation::joint, ref, cfg.seed));

  std::vector<RunLogEntry> log;
  std::uint64_t stream = 0;
  for (const Formulation f : {Formulation::joint, Formulation::independent}) {
    Rng rng = make_stream(cfg.seed, stream++);
    j["estimates"].push_back(price_json(payoff, f, cmc_price(law, f, cfg.price.samples, rng), cfg.seed));
  }
  for (const Formulation f : {Formulation::joint, Formulation::independent}) {
    AEConfig ae;
    ae.epsilon = cfg.price.epsilon;
    ae.rho = cfg.price.rho;
    ae.seed = make_stream(cfg.seed, stream++)();
    const PriceEstimate e = qamc_price(law, f, ae);
    j["estimates"].push_back(price_json(payoff, f, e, ae.seed));
    log.push_back({e.estimator, ref.value, ae.epsilon, ae.rho, e.value, e.samples_or_queries, ae.seed});
  }
  write_json_file(dir / "price.json", j);
  auto csv = open_out(dir / "price_runlog.csv");
  write_run_log(csv, log);
  note(opt, "price: riemann reference " + std::to_string(ref.value));
  return 0;
}

int cmd_study(const RunOptions& opt, std::string_view which) {
  const auto dir = prepare_out(opt);
  const AppConfig& cfg = opt.config;
  if (which == "coeffs") {
    const auto r = study_coeffs(cfg.coeffs, opt.exec);
    auto csv = open_out(dir / "study_coeffs.csv");
    write_convergence_csv(csv, r.records);
    auto runlog = open_out(dir / "study_coeffs_runlog.csv");
    write_run_log(runlog, r.run_log);
    Json per_k = Json::array();
    for (std::size_t k = 0; k < r.truth.size(); ++k)
      per_k.push_back({{"k", k}, {"truth", r.truth[k]}, {"cmc_err", r.cmc_per_k[k]}, {"qamc_err", r.qamc_per_k[k]}});
    write_json_file(dir / "study_coeffs.json", {{"interval", {r.grid.interval.a, r.grid.interval.b}},
                                                {"cmc_fit", fit_json(r.cmc_fit)},
                                                {"qamc_fit", fit_json(r.qamc_fit)},
                                                {"k_low", cfg.coeffs.k_low},
                                                {"k_high", cfg.coeffs.k_high},
                                                {"cmc_ratio", r.cmc_ratio},
                                                {"qamc_ratio", r.qamc_ratio},
                                                {"per_k", per_k}});
    note(opt, "study coeffs: slopes cmc " + std::to_string(r.cmc_fit.slope) + ", qamc " +
                  std::to_string(r.qamc_fit.slope));
    return 0;
  }
  if (which == "density") {
    const auto r = study_density(cfg.density_study, opt.exec);
    auto csv = open_out(dir / "study_density.csv");
    write_density_csv(csv, r.rows);
    note(opt, "study density: " + std::to_string(r.rows.size()) + " rows");
    return 0;
  }
  if (which == "price") {
    Json summary = {{"setups", Json::array()}};
    for (const auto& setup : cfg.price_setups) {
      PriceStudyConfig pc = cfg.price_study;
      pc.name = setup.name;
      pc.qubits = setup.qubits;
      const bool spread = setup.name == "spread";
      const auto model = spread ? fixtures::spread_model(cfg.density) : fixtures::basket_model(cfg.density);
      const auto payoff = spread ? fixtures::spread_payoff() : fixtures::basket_payoff();
      const auto r = study_price(model, payoff, pc, opt.exec);
      auto csv = open_out(dir / ("study_price_" + setup.name + ".csv"));
      write_convergence_csv(csv, r.records);
      auto runlog = open_out(dir / ("study_price_" + setup.name + "_runlog.csv"));
      write_run_log(runlog, r.run_log);
      summary["setups"].push_back({{"name", setup.name},
                                   {"qubits_per_dim", setup.qubits},
                                   {"reference", r.reference},
                                   {"joint_mass", r.joint_mass},
                                   {"c_max", r.c_max},
                                   {"payoff_max", r.payoff_max},
                                   {"target_error", pc.target_error},
                                   {"cmc_fit", fit_json(r.cmc_fit)},
                                   {"qamc_joint_fit", fit_json(r.joint_fit)},
                                   {"qamc_independent_fit", fit_json(r.independent_fit)},
                                   {"cmc_cost", r.cmc_cost},
                                   {"qamc_joint_cost", r.joint_cost},
                                   {"qamc_independent_cost", r.independent_cost}});
      note(opt, "study price " + setup.name + ": cost ratio joint " + std::to_string(r.cmc_cost / r.joint_cost) +
                    ", independent " + std::to_string(r.cmc_cost / r.independent_cost));
    }
    write_json_file(dir / "study_price.json", summary);
    return 0;
  }
  throw ValidationError("unknown study '" + std::string(which) + "' (coeffs, density or price)");
}

int cmd_pipeline(const RunOptions& opt) {
  using Stage = int (*)(const RunOptions&);
  const std::pair<const char*, Stage> stages[] = {{"ingest", cmd_ingest},       {"curves", cmd_curves},
                                                  {"arb-check", cmd_arb_check}, {"calibrate", cmd_calibrate},
                                                  {"density", cmd_density},     {"price", cmd_price}};
  for (const auto& [name, fn] : stages) {
    int rc = 0;
    try {
      rc = fn(opt);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
    if (rc != 0) {
      note(opt, std::string("pipeline stopped at ") + name);
      return rc;
    }
  }
  return 0;
}

int cmd_synth(const RunOptions& opt) {
  const auto dir = prepare_out(opt);
  std::vector<OptionQuote> quotes;
  Json spots = Json::object();
  const std::size_t n = opt.config.synth_strikes;
  for (const auto& a : fixtures::all()) {
    const MarketSlice slice = fixtures::slice_for(a);
    std::vector<double> strikes(n);
    for (std::size_t i = 0; i < n; ++i)
      strikes[i] = slice.forward * (0.7 + 0.6 * static_cast<double>(i) / static_cast<double>(n - 1));
    const auto q = generate_synthetic_quotes(a.params, slice, strikes, opt.config.synth_spread);
    quotes.insert(quotes.end(), q.begin(), q.end());
    spots[a.name] = a.spot;
  }
  {
    auto out = open_out(dir / "quotes.csv");
    write_quotes(out, quotes);
  }
  const auto basket = fixtures::basket_model();
  write_json_file(dir / "correlation.json", correlation_json(basket.copula));
  Json cfg = {{"quotes", "quotes.csv"},
              {"spots", spots},
              {"correlation", "correlation.json"},
              {"seed", opt.config.seed},
              {"price",
               {{"payoff", "basket-call"},
                {"strike", 25.0},
                {"assets", basket.copula.assets},
                {"qubits", 2},
                {"cell_mass", "cell-probability"}}}};
  write_json_file(dir / "config.json", cfg);
  note(opt, "synth: " + std::to_string(quotes.size()) + " quotes");
  return 0;
}

}  // namespace cqamc
