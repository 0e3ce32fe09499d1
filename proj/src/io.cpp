#include "cqamc/io.hpp"

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string_view>

#include "cqamc/errors.hpp"

namespace cqamc {
namespace {

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T read_req(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing key '" + std::string(key) + "'");
  T out{};
  read_opt(j, key, out, where);
  return out;
}

NIGParams params_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"alpha", "beta", "delta"}, where);
  NIGParams p;
  p.alpha = read_req<double>(j, "alpha", where);
  p.beta = read_req<double>(j, "beta", where);
  p.delta = read_req<double>(j, "delta", where);
  return p;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

IntervalRule interval_rule_from_string(const std::string& s) {
  if (s == "cumulant") return IntervalRule::cumulant;
  if (s == "tail-quantile") return IntervalRule::tail_quantile;
  throw ValidationError("unknown interval rule '" + s + "'");
}

void read_ladders(const Json& j, std::vector<std::size_t>& samples, std::vector<double>& epsilons,
                  const std::string& where) {
  read_opt(j, "samples", samples, where);
  read_opt(j, "epsilons", epsilons, where);
}

}  // namespace

Json curves_json(const std::string& underlying, double expiry, const Curves& c) {
  return {{"underlying", underlying}, {"expiry_years", expiry}, {"df", c.discount_factor},
          {"forward", c.forward},     {"r", c.rate},            {"q", c.dividend_yield}};
}

Json calibration_json(const std::string& underlying, double expiry, const CalibrationResult& r, double lambda) {
  return {{"underlying", underlying}, {"expiry_years", expiry}, {"alpha", r.theta.alpha},
          {"beta", r.theta.beta},     {"delta", r.theta.delta}, {"lambda", lambda},
          {"objective", r.objective}, {"rmse_bp", r.rmse_bp},   {"max_err_bp", r.max_err_bp},
          {"n_quotes", r.n_quotes}};
}

CalibratedAsset calibrated_asset_from_json(const Json& j) {
  const std::string where = "calibration report";
  CalibratedAsset a;
  a.underlying = read_req<std::string>(j, "underlying", where);
  a.expiry = read_req<double>(j, "expiry_years", where);
  a.params.alpha = read_req<double>(j, "alpha", where);
  a.params.beta = read_req<double>(j, "beta", where);
  a.params.delta = read_req<double>(j, "delta", where);
  require_admissible(a.params);
  return a;
}

Json series_json(const CosineSeries& s) { return {{"a", s.interval.a}, {"b", s.interval.b}, {"coeffs", s.coeffs}}; }

CosineSeries series_from_json(const Json& j) {
  const std::string where = "series";
  check_keys(j, {"a", "b", "coeffs"}, where);
  CosineSeries s;
  s.interval = {read_req<double>(j, "a", where), read_req<double>(j, "b", where)};
  s.coeffs = read_req<std::vector<double>>(j, "coeffs", where);
  if (!(s.interval.a < s.interval.b)) throw ValidationError("series: needs a < b");
  if (s.coeffs.empty()) throw ValidationError("series: no coefficients");
  return s;
}

Json correlation_json(const CopulaSpec& spec) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < spec.sigma.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < spec.sigma.cols(); ++k) row.push_back(spec.sigma(i, k));
    rows.push_back(row);
  }
  return {{"assets", spec.assets}, {"sigma", rows}};
}

CopulaSpec correlation_from_json(const Json& j) {
  const std::string where = "correlation";
  check_keys(j, {"assets", "sigma"}, where);
  const auto assets = read_req<std::vector<std::string>>(j, "assets", where);
  const auto rows = read_req<std::vector<std::vector<double>>>(j, "sigma", where);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw ValidationError("correlation matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return CopulaSpec::from_matrix(m, assets);
}

Json price_json(const Payoff& payoff, Formulation f, const PriceEstimate& e, std::uint64_t seed) {
  Json j = {{"payoff", to_string(payoff.kind)},
            {"strike", payoff.strike},
            {"formulation", to_string(f)},
            {"estimator", e.estimator},
            {"value", e.value},
            {"stderr_or_eps", e.stderr_or_eps},
            {"samples_or_queries", e.samples_or_queries},
            {"seed", seed}};
  if (e.target_epsilon > 0.0) j["target_epsilon"] = e.target_epsilon;
  return j;
}

Json violation_json(const Violation& v) {
  return {{"type", v.type == ArbitrageType::digital ? "digital" : "butterfly"},
          {"kind", to_string(v.kind)},
          {"strikes", v.strikes},
          {"value", v.value}};
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records) {
  const auto old = os.precision(17);
  os << "method,level,cost,mean_abs_err,ci90_lo,ci90_hi,repetitions\n";
  for (const auto& r : records)
    os << r.method << ',' << r.level << ',' << r.cost << ',' << r.mean_abs_err << ',' << r.ci90_lo << ','
       << r.ci90_hi << ',' << r.repetitions << '\n';
  os.precision(old);
}

void write_density_csv(std::ostream& os, std::span<const DensityRow> rows) {
  const auto old = os.precision(17);
  os << "terms,method,mean_cost,pdf_sup_mean,pdf_sup_median,pdf_sup_lo,pdf_sup_hi,"
        "cdf_sup_mean,cdf_sup_median,cdf_sup_lo,cdf_sup_hi\n";
  for (const auto& r : rows)
    os << r.terms << ',' << r.method << ',' << r.mean_cost << ',' << r.pdf_sup_mean << ',' << r.pdf_sup_median << ','
       << r.pdf_sup_lo << ',' << r.pdf_sup_hi << ',' << r.cdf_sup_mean << ',' << r.cdf_sup_median << ','
       << r.cdf_sup_lo << ',' << r.cdf_sup_hi << '\n';
  os.precision(old);
}

void write_run_log(std::ostream& os, std::span<const RunLogEntry> entries) {
  os << kRunLogHeader << '\n';
  for (const auto& e : entries) write_run_log_line(os, e);
}

Json fit_json(const LineFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.used}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void set_seed(AppConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.coeffs.seed = seed;
  cfg.density_study.seed = seed + 1;
  cfg.price_study.seed = seed + 2;
}

AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"quotes", "spots", "correlation", "seed", "calibration", "density", "price", "study", "synth"},
             "config");
  AppConfig cfg;
  if (j.contains("quotes")) cfg.quotes = resolve(base_dir, read_req<std::string>(j, "quotes", "config")).string();
  read_opt(j, "spots", cfg.spots, "config");
  for (const auto& [name, spot] : cfg.spots)
    if (!(spot > 0.0)) throw ValidationError("config.spots: spot of " + name + " must be positive");
  if (j.contains("correlation")) {
    const Json& c = j.at("correlation");
    cfg.correlation = c.is_string() ? correlation_from_json(read_json_file(resolve(base_dir, c.get<std::string>())))
                                    : correlation_from_json(c);
  }
  std::uint64_t seed = cfg.seed;
  read_opt(j, "seed", seed, "config");
  set_seed(cfg, seed);

  if (j.contains("calibration")) {
    const Json& c = j.at("calibration");
    const std::string w = "config.calibration";
    check_keys(c, {"lambda", "prior", "weights", "weight_floor", "max_iterations"}, w);
    read_opt(c, "lambda", cfg.calibration.lambda, w);
    if (!(cfg.calibration.lambda >= 0.0)) throw ValidationError(w + ".lambda must be >= 0");
    if (c.contains("prior")) cfg.calibration.prior = params_from_json(c.at("prior"), w + ".prior");
    if (c.contains("weights")) {
      const auto s = read_req<std::string>(c, "weights", w);
      if (s == "inverse-spread") cfg.calibration.weights = WeightRule::inverse_spread;
      else if (s == "uniform") cfg.calibration.weights = WeightRule::uniform;
      else throw ValidationError(w + ".weights: unknown rule '" + s + "'");
    }
    read_opt(c, "weight_floor", cfg.calibration.weight_floor, w);
    read_opt(c, "max_iterations", cfg.calibration.tol.max_iterations, w);
  }
  if (j.contains("density")) {
    const Json& d = j.at("density");
    const std::string w = "config.density";
    check_keys(d, {"terms", "tail_epsilon", "interval_rule"}, w);
    read_opt(d, "terms", cfg.density.terms, w);
    read_opt(d, "tail_epsilon", cfg.density.tail_epsilon, w);
    if (d.contains("interval_rule")) cfg.density.rule = interval_rule_from_string(read_req<std::string>(d, "interval_rule", w));
    if (cfg.density.terms < 2) throw ValidationError(w + ".terms must be >= 2");
    if (!(cfg.density.tail_epsilon > 0.0 && cfg.density.tail_epsilon < 0.5))
      throw ValidationError(w + ".tail_epsilon must lie in (0, 0.5)");
  }
  if (j.contains("price")) {
    const Json& p = j.at("price");
    const std::string w = "config.price";
    check_keys(p, {"payoff", "strike", "weights", "assets", "qubits", "grid_tail", "cell_mass", "samples", "epsilon",
                   "rho"},
               w);
    if (p.contains("payoff")) cfg.price.payoff.kind = payoff_kind_from_string(read_req<std::string>(p, "payoff", w));
    read_opt(p, "strike", cfg.price.payoff.strike, w);
    read_opt(p, "weights", cfg.price.payoff.weights, w);
    read_opt(p, "assets", cfg.price.assets, w);
    read_opt(p, "qubits", cfg.price.qubits, w);
    read_opt(p, "grid_tail", cfg.price.grid_tail, w);
    if (p.contains("cell_mass")) cfg.price.cell_mass = cell_mass_from_string(read_req<std::string>(p, "cell_mass", w));
    read_opt(p, "samples", cfg.price.samples, w);
    read_opt(p, "epsilon", cfg.price.epsilon, w);
    read_opt(p, "rho", cfg.price.rho, w);
    if (!(cfg.price.payoff.strike >= 0.0)) throw ValidationError(w + ".strike must be >= 0");
    if (cfg.price.qubits == 0) throw ValidationError(w + ".qubits must be >= 1");
    if (cfg.price.samples == 0) throw ValidationError(w + ".samples must be >= 1");
    if (!(cfg.price.epsilon > 0.0 && cfg.price.epsilon < 1.0)) throw ValidationError(w + ".epsilon must lie in (0, 1)");
    if (!(cfg.price.rho > 0.0 && cfg.price.rho < 1.0)) throw ValidationError(w + ".rho must lie in (0, 1)");
  }
  if (j.contains("study")) {
    const Json& s = j.at("study");
    const std::string w = "config.study";
    check_keys(s, {"repetitions", "coeffs", "density", "price"}, w);
    if (s.contains("repetitions")) {
      const auto reps = read_req<std::size_t>(s, "repetitions", w);
      cfg.coeffs.repetitions = cfg.density_study.repetitions = cfg.price_study.repetitions = reps;
    }
    if (s.contains("coeffs")) {
      const Json& c = s.at("coeffs");
      const std::string wc = w + ".coeffs";
      check_keys(c, {"asset", "expiry", "qubits", "terms", "samples", "epsilons", "rho", "grid_tail", "ratio_samples",
                     "ratio_epsilon", "k_low", "k_high"},
                 wc);
      if (c.contains("asset")) cfg.coeffs.params = params_from_json(c.at("asset"), wc + ".asset");
      read_opt(c, "expiry", cfg.coeffs.expiry, wc);
      read_opt(c, "qubits", cfg.coeffs.qubits, wc);
      read_opt(c, "terms", cfg.coeffs.terms, wc);
      read_ladders(c, cfg.coeffs.samples, cfg.coeffs.epsilons, wc);
      read_opt(c, "rho", cfg.coeffs.rho, wc);
      read_opt(c, "grid_tail", cfg.coeffs.grid_tail, wc);
      read_opt(c, "ratio_samples", cfg.coeffs.ratio_samples, wc);
      read_opt(c, "ratio_epsilon", cfg.coeffs.ratio_epsilon, wc);
      read_opt(c, "k_low", cfg.coeffs.k_low, wc);
      read_opt(c, "k_high", cfg.coeffs.k_high, wc);
    }
    if (s.contains("density")) {
      const Json& d = s.at("density");
      const std::string wd = w + ".density";
      check_keys(d, {"asset", "expiry", "qubits", "terms", "cost", "rho", "grid_tail", "points"}, wd);
      if (d.contains("asset")) cfg.density_study.params = params_from_json(d.at("asset"), wd + ".asset");
      read_opt(d, "expiry", cfg.density_study.expiry, wd);
      read_opt(d, "qubits", cfg.density_study.qubits, wd);
      read_opt(d, "terms", cfg.density_study.terms, wd);
      read_opt(d, "cost", cfg.density_study.cost, wd);
      read_opt(d, "rho", cfg.density_study.rho, wd);
      read_opt(d, "grid_tail", cfg.density_study.grid_tail, wd);
      read_opt(d, "points", cfg.density_study.points, wd);
    }
    if (s.contains("price")) {
      const Json& p = s.at("price");
      const std::string wp = w + ".price";
      check_keys(p, {"setups", "samples", "epsilons", "rho", "target_error", "grid_tail", "cell_mass"}, wp);
      if (p.contains("setups")) {
        cfg.price_setups.clear();
        for (const auto& e : p.at("setups")) {
          check_keys(e, {"name", "qubits"}, wp + ".setups");
          StudyPriceSetup su;
          su.name = read_req<std::string>(e, "name", wp + ".setups");
          read_opt(e, "qubits", su.qubits, wp + ".setups");
          if (su.name != "spread" && su.name != "basket")
            throw ValidationError(wp + ".setups: unknown setup '" + su.name + "' (spread or basket)");
          cfg.price_setups.push_back(su);
        }
      }
      read_ladders(p, cfg.price_study.samples, cfg.price_study.epsilons, wp);
      read_opt(p, "rho", cfg.price_study.rho, wp);
      read_opt(p, "target_error", cfg.price_study.target_error, wp);
      read_opt(p, "grid_tail", cfg.price_study.grid_tail, wp);
      if (p.contains("cell_mass"))
        cfg.price_study.cell_mass = cell_mass_from_string(read_req<std::string>(p, "cell_mass", wp));
    }
    cfg.coeffs.validate();
    cfg.density_study.validate();
    cfg.price_study.validate();
  }
  if (j.contains("synth")) {
    const Json& s = j.at("synth");
    const std::string w = "config.synth";
    check_keys(s, {"strikes", "spread_abs", "spread_rel"}, w);
    read_opt(s, "strikes", cfg.synth_strikes, w);
    read_opt(s, "spread_abs", cfg.synth_spread.absolute, w);
    read_opt(s, "spread_rel", cfg.synth_spread.relative, w);
    if (cfg.synth_strikes < 3) throw ValidationError(w + ".strikes must be >= 3");
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

}  // namespace cqamc
