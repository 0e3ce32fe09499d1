// Runs the nine acceptance criteria and prints one PASS/FAIL line each.
// Exit status is 0 when every criterion ran to completion; with --strict it is
// 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "cqamc/black_scholes.hpp"
#include "cqamc/calibration.hpp"
#include "cqamc/cosine_density.hpp"
#include "cqamc/fixtures.hpp"
#include "cqamc/market_data.hpp"
#include "cqamc/numerics.hpp"
#include "cqamc/qamc.hpp"
#include "cqamc/studies.hpp"

using namespace cqamc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

Outcome curve_stripping() {
  const double s0 = 100, r = 0.03, q = 0.01, t = 1;
  std::vector<OptionQuote> quotes;
  for (int i = 0; i < 20; ++i) {
    const double k = 60.0 + 80.0 * i / 19;
    for (auto kind : {OptionKind::call, OptionKind::put}) {
      const double p = bs_price({s0, k, t, r, q, 0.2}, kind);
      quotes.push_back({"X", t, k, kind, p, p, 0});
    }
  }
  const auto c = strip_curves(quotes, s0, t);
  const double df_err = rel(c.discount_factor, std::exp(-r * t));
  const double fw_err = rel(c.forward, s0 * std::exp((r - q) * t));
  return {df_err <= 1e-10 && fw_err <= 1e-10, fmt("DF rel err %.2e, FW rel err %.2e", df_err, fw_err)};
}

Outcome nig_bundle() {
  double norm = 0, mart = 0, mu = 0, cos = 0;
  for (const auto& a : fixtures::all()) {
    const auto model = fixtures::model_for(a);
    const NigPricer pricer(model);
    norm = std::max(norm, std::abs(pricer.total_mass() - 1.0));
    mart = std::max(mart, rel(pricer.expected_terminal(), model.slice.forward));
    auto shifted = model;
    shifted.params.mu = 0.7;
    const NigPricer shifted_pricer(shifted);
    for (int i = 0; i < 21; ++i) {
      const double k = model.slice.forward * (0.7 + 0.03 * i);
      for (auto kind : {OptionKind::call, OptionKind::put}) {
        const double ref = pricer.price(k, kind);
        mu = std::max(mu, std::abs(shifted_pricer.price(k, kind) - ref));
        cos = std::max(cos, rel(price_european_cos(model, k, kind, 1024), ref));
      }
    }
  }
  return {norm <= 1e-9 && mart <= 1e-7 && mu <= 1e-9 && cos <= 1e-6,
          fmt("mass err %.1e, martingale rel err %.1e, mu shift %.1e, COS(1024) rel err %.1e", norm, mart, mu, cos)};
}

Outcome calibration_round_trip() {
  const auto a = fixtures::axa();
  auto slice = fixtures::slice_for(a);
  std::vector<double> strikes;
  for (int i = 0; i < 21; ++i) strikes.push_back(slice.forward * (0.7 + 0.03 * i));
  slice.quotes = generate_synthetic_quotes(a.params, slice, strikes, {});
  CalibrationConfig cfg;
  cfg.lambda = fixtures::kLambda;
  cfg.prior = bs_prior(slice);
  const auto r = calibrate(slice, cfg);
  const double ea = rel(r.theta.alpha, a.params.alpha), eb = rel(r.theta.beta, a.params.beta),
               ed = rel(r.theta.delta, a.params.delta);
  const bool ok = ea <= 0.02 && eb <= 0.02 && ed <= 0.02 && r.rmse_bp <= 10.0;
  return {ok, fmt("alpha %.4f beta %.4f delta %.4f (rel err %.1e %.1e %.1e), RMSE %.2e bp", r.theta.alpha,
                  r.theta.beta, r.theta.delta, ea, eb, ed, r.rmse_bp)};
}

Outcome cosine_recovery() {
  const NIGParams p = fixtures::axa().params;
  const auto iv = tail_quantile_interval(p, 1.0, 1e-6);
  const auto s = coeffs_nig(p, 1.0, iv, 128);
  const auto err = nig_series_error(s, p, 1.0);
  const auto fit = estimate_decay(s);
  const auto wide = nig_series_error(coeffs_nig(p, 1.0, cumulant_interval(p, 1.0, 10.0), 128), p, 1.0);
  return {err.cdf_sup <= 1e-4 && fit.nu > 0.0,
          fmt("sup|F-hat - F| %.2e, decay rate nu %.3f (r2 %.3f); cumulant L=10 interval gives %.2e", err.cdf_sup,
              fit.nu, fit.r2, wide.cdf_sup)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]) / n, my += std::log(y[i]) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Outcome qae_contract() {
  std::string detail;
  bool ok = true;
  std::vector<double> eps, queries;
  for (double e = 1e-2; e >= 1e-2 / 64; e /= 2) {
    eps.push_back(e);
    queries.push_back(0.0);
  }
  for (double a : {0.1, 0.25, 0.7}) {
    const std::vector<double> masses{1.0, 1.0};
    auto o = build_density_oracle(masses);
    const std::vector<double> phi{a, a};
    set_payoff(o, phi);
    int hits = 0;
    AEConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.rho = 0.05;
    for (std::uint64_t s = 0; s < 200; ++s) {
      cfg.seed = s;
      if (std::abs(iqae_estimate(o, cfg).estimate - a) <= cfg.epsilon) ++hits;
    }
    const double coverage = hits / 200.0;
    ok = ok && coverage >= 0.92;
    detail += fmt("coverage(a=%.2f) %.3f, ", a, coverage);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      AEConfig c;
      c.epsilon = eps[i];
      for (std::uint64_t s = 0; s < 64; ++s) {
        c.seed = 1000 + s;
        queries[i] += static_cast<double>(iqae_estimate(o, c).oracle_queries) / (3 * 64);
      }
    }
  }
  const double slope = fit_slope(eps, queries);
  ok = ok && within(slope, -1.0, 0.15);
  return {ok, detail + fmt("query slope vs eps %.3f", slope)};
}

Outcome coefficient_study() {
  const auto r = study_coeffs(CoeffStudyConfig{});
  const bool ok = within(r.cmc_fit.slope, -0.5, 0.1) && within(r.qamc_fit.slope, -1.0, 0.15) && r.cmc_ratio > 2.0 &&
                  r.qamc_ratio < 1.5;
  return {ok, fmt("slopes CMC %.3f QAMC %.3f; error ratio k=12/k=1 CMC %.2f QAMC %.2f", r.cmc_fit.slope,
                  r.qamc_fit.slope, r.cmc_ratio, r.qamc_ratio)};
}

Outcome pricing_study() {
  bool ok = true;
  std::string detail;
  struct Setup {
    const char* name;
    MultiAssetModel model;
    Payoff payoff;
    std::size_t qubits;
  };
  const Setup setups[] = {{"spread", fixtures::spread_model(), fixtures::spread_payoff(), 3},
                          {"basket", fixtures::basket_model(), fixtures::basket_payoff(), 2}};
  for (const auto& s : setups) {
    PriceStudyConfig cfg;
    cfg.name = s.name;
    cfg.qubits = s.qubits;
    const auto r = study_price(s.model, s.payoff, cfg);
    const double rj = r.cmc_cost / r.joint_cost, ri = r.cmc_cost / r.independent_cost;
    const bool slopes = within(r.cmc_fit.slope, -0.5, 0.1) && within(r.joint_fit.slope, -1.0, 0.15) &&
                        within(r.independent_fit.slope, -1.0, 0.15);
    const bool ratios = rj >= 10 && rj <= 100 && ri >= 10 && ri <= 100;
    ok = ok && slopes && ratios && r.joint_cost <= r.independent_cost;
    detail += fmt("%s: slopes CMC %.3f joint %.3f ind %.3f, CMC/QAMC cost at 1e-3 joint %.1fx ind %.1fx; ", s.name,
                  r.cmc_fit.slope, r.joint_fit.slope, r.independent_fit.slope, rj, ri);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome copula_identities() {
  auto m = fixtures::spread_model();
  const auto payoff = fixtures::spread_payoff();
  double identity_gap = 0.0;
  {
    const auto law = discretize(m, PricingGrid::on_quantiles(m, 3, kDefaultGridTail), payoff);
    for (std::size_t j = 0; j < law.joint_mass.size(); ++j) {
      const double hat = law.payoff[j] * law.copula[j] / law.c_max;
      identity_gap = std::max(identity_gap, std::abs(law.joint_mass[j] * law.payoff[j] -
                                                     law.independent_mass[j] * hat * law.c_max));
    }
  }
  m.copula = CopulaSpec::identity(2);
  const auto law = discretize(m, PricingGrid::on_quantiles(m, 3, kDefaultGridTail), payoff);
  const double ref = riemann_reference(law);
  const double ref_ind = riemann_reference_independent(law);
  auto r1 = make_stream(81, 1), r2 = make_stream(81, 2);
  const auto cj = cmc_price(law, Formulation::joint, 100000, r1);
  const auto ci = cmc_price(law, Formulation::independent, 100000, r2);
  AEConfig ae;
  ae.epsilon = 1e-3;
  ae.seed = 81;
  const auto qj = qamc_price(law, Formulation::joint, ae);
  const auto qi = qamc_price(law, Formulation::independent, ae);
  const bool agree = law.c_max == 1.0 && std::abs(ref - ref_ind) <= 1e-12 * ref &&
                     std::abs(cj.value - ref) <= 4 * cj.stderr_or_eps && std::abs(ci.value - ref) <= 4 * ci.stderr_or_eps &&
                     std::abs(qj.value - ref) <= qj.stderr_or_eps && std::abs(qi.value - ref) <= qi.stderr_or_eps;
  return {agree && identity_gap <= 1e-12,
          fmt("identity corr: riemann %.6f / %.6f, CMC %.4f / %.4f, QAMC %.4f / %.4f; grid identity gap %.1e", ref,
              ref_ind, cj.value, ci.value, qj.value, qi.value, identity_gap)};
}

Outcome arbitrage_checkers() {
  std::size_t bs_violations = 0;
  for (double t : {0.25, 1.0, 2.0}) {
    std::vector<OptionQuote> quotes;
    for (int i = 0; i < 41; ++i) {
      const double k = 50.0 + 2.5 * i;
      for (auto kind : {OptionKind::call, OptionKind::put}) {
        const double p = bs_price({100, k, t, 0.02, 0.01, 0.25}, kind);
        quotes.push_back({"X", t, k, kind, p, p, 0});
      }
    }
    bs_violations += check_arbitrage(quotes).size();
  }
  const std::vector<StrikePrice> digital{{80, 22}, {90, 13}, {100, 13}, {110, 6}};
  const auto d = check_digital_arbitrage(digital, OptionKind::call);
  const bool d_ok = d.size() == 1 && d[0].strikes == std::vector<double>{90, 100};
  const std::vector<StrikePrice> fly{{80, 22}, {90, 14}, {100, 9}, {110, 6}, {120, 1.5}};
  const auto b = check_butterfly_arbitrage(fly, OptionKind::call);
  const bool b_ok = b.size() == 1 && b[0].strikes == std::vector<double>{100, 110, 120};
  return {bs_violations == 0 && d_ok && b_ok,
          fmt("BS surfaces: %zu violations; digital flagged at %s; butterfly flagged at %s", bs_violations,
              d.empty() ? "none" : fmt("(%g, %g)", d[0].strikes[0], d[0].strikes[1]).c_str(),
              b.empty() ? "none" : fmt("(%g, %g, %g)", b[0].strikes[0], b[0].strikes[1], b[0].strikes[2]).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"curve stripping exactness", 1, curve_stripping},
      {"NIG correctness bundle", 10, nig_bundle},
      {"calibration round trip", 120, calibration_round_trip},
      {"cosine recovery", 5, cosine_recovery},
      {"QAE contract coverage", 120, qae_contract},
      {"coefficient study", 600, coefficient_study},
      {"pricing study", 1800, pricing_study},
      {"copula identities", 1, copula_identities},
      {"arbitrage checkers", 1, arbitrage_checkers},
  };
  int failed = 0, n = 0;
  for (const auto& c : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      std::printf("FAIL %d %s: threw %s\n", n, c.name, e.what());
      std::fflush(stdout);
      return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    if (!pass) ++failed;
    std::printf("%s %d %s: %s (%.2f s, budget %.0f s)\n", pass ? "PASS" : "FAIL", n, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return strict && failed ? 1 : 0;
}
