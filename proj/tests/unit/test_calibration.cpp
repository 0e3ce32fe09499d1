#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "cqamc/black_scholes.hpp"
#include "cqamc/calibration.hpp"
#include "cqamc/fixtures.hpp"
#include "cqamc/market_data.hpp"

using namespace cqamc;

namespace {

MarketSlice synthetic_slice(const fixtures::AssetFixture& a, double spread = 0.0) {
  auto slice = fixtures::slice_for(a);
  std::vector<double> strikes;
  for (int i = 0; i < 21; ++i) strikes.push_back(slice.forward * (0.7 + 0.03 * i));
  slice.quotes = generate_synthetic_quotes(a.params, slice, strikes, {spread, 0.0});
  return slice;
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

TEST_CASE("objective vanishes at the truth without penalty") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a);
  CalibrationConfig cfg;
  cfg.lambda = 0.0;
  CHECK(objective(a.params, slice, cfg) <= 1e-14);

  cfg.lambda = 1e-3;
  cfg.prior = a.params;
  CHECK(objective(a.params, slice, cfg) <= 1e-14);

  NIGParams off = a.params;
  off.alpha += 0.5;
  CHECK_THROWS_AS(objective({1.0, 0.5, 0.2, 0.0}, slice, cfg), DomainError);
  CHECK(objective(off, slice, cfg) > objective(a.params, slice, cfg));
}

TEST_CASE("objective penalty is lambda times squared distance") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a, 0.01);
  CalibrationConfig with, without;
  with.lambda = 0.25;
  without.lambda = 0.0;
  NIGParams p = a.params;
  p.alpha += 0.3;
  p.beta -= 0.2;
  p.delta += 0.05;
  const double d2 = std::pow(p.alpha - with.prior.alpha, 2) + std::pow(p.beta - with.prior.beta, 2) +
                    std::pow(p.delta - with.prior.delta, 2);
  CHECK(objective(p, slice, with) - objective(p, slice, without) == doctest::Approx(0.25 * d2).epsilon(1e-10));
}

TEST_CASE("grid init") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a);
  CalibrationConfig cfg;
  cfg.grid = {{4.0, 5.24, 8.0}, {-4.0, -3.26, 0.0}, {0.1, 0.18, 0.4}};
  const auto best = grid_init(slice, cfg);
  CHECK(best.alpha == 5.24);
  CHECK(best.beta == -3.26);
  CHECK(best.delta == 0.18);

  cfg.grid = {{6.0}, {-2.0}, {0.2}};
  const auto single = grid_init(slice, cfg);
  CHECK(single.alpha == 6.0);
  CHECK(single.beta == -2.0);
  CHECK(single.delta == 0.2);

  cfg.grid = {{1.0}, {0.5}, {0.2}};
  CHECK_THROWS(grid_init(slice, cfg));
}

TEST_CASE("default lattice start beats the lattice median") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a, 0.01);
  const CalibrationConfig cfg;
  std::vector<double> values;
  for (double al : cfg.grid.alpha)
    for (double be : cfg.grid.beta)
      for (double de : cfg.grid.delta) {
        const NIGParams p{al, be, de, 0.0};
        if (is_admissible(p, cfg.admissibility_margin)) values.push_back(objective(p, slice, cfg));
      }
  std::sort(values.begin(), values.end());
  const double median = values[values.size() / 2];
  CHECK(objective(grid_init(slice, cfg), slice, cfg) < median);
  CHECK(objective(grid_init(slice, cfg), slice, cfg) == values.front());
}

TEST_CASE("calibration round trip on AXA quotes") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a);
  CalibrationConfig cfg;
  cfg.lambda = fixtures::kLambda;
  cfg.prior = bs_prior(slice);
  const auto r = calibrate(slice, cfg);
  CHECK(rel(r.theta.alpha, a.params.alpha) < 0.02);
  CHECK(rel(r.theta.beta, a.params.beta) < 0.02);
  CHECK(rel(r.theta.delta, a.params.delta) < 0.02);
  CHECK(r.theta.mu == 0.0);
  CHECK(r.rmse_bp <= 10.0);
  CHECK(r.max_err_bp <= 6.0);
  CHECK(r.objective <= r.start_objective);
  for (const auto& p : r.trace) CHECK(is_admissible(p, cfg.admissibility_margin));

  const auto again = calibrate(slice, cfg);
  CHECK(again.theta.alpha == r.theta.alpha);
  CHECK(again.theta.beta == r.theta.beta);
  CHECK(again.theta.delta == r.theta.delta);
  CHECK(again.objective == r.objective);
}

TEST_CASE("calibration on Michelin quotes stays within 6 bp") {
  const auto a = fixtures::michelin();
  const auto slice = synthetic_slice(a);
  CalibrationConfig cfg;
  cfg.prior = bs_prior(slice);
  const auto r = calibrate(slice, cfg);
  CHECK(r.max_err_bp <= 6.0);
}

TEST_CASE("heavy regularization pulls the fit to the prior") {
  const auto a = fixtures::axa();
  const auto slice = synthetic_slice(a, 0.01);
  CalibrationConfig cfg;
  cfg.weights = WeightRule::uniform;
  cfg.prior = {8.0, -1.0, 0.3, 0.0};
  auto distance = [&](double lambda) {
    cfg.lambda = lambda;
    const auto t = calibrate(slice, cfg).theta;
    return std::hypot(t.alpha - 8.0, t.beta + 1.0, t.delta - 0.3);
  };
  const double loose = distance(5e-7), tight = distance(1e3), rigid = distance(1e7);
  CHECK(tight < 0.05 * loose);
  CHECK(rigid < tight);
  CHECK(rigid < 1e-4);
}

TEST_CASE("black-scholes prior") {
  auto slice = MarketSlice::from_rates("X", 100, 1.0, 0.02, 0.0);
  for (double k : {80.0, 90.0, 100.0, 102.0, 110.0, 120.0})
    for (auto kind : {OptionKind::call, OptionKind::put}) {
      const double p = bs_price({100, k, 1, 0.02, 0, 0.2}, kind);
      slice.quotes.push_back({"X", 1.0, k, kind, p, p, 0});
    }
  double sigma = 0.0;
  const auto prior = bs_prior(slice, &sigma);
  CHECK(std::abs(sigma - 0.2) < 1e-6);
  CHECK(prior.beta == 0.0);
  CHECK(prior.alpha == 10.0);
  CHECK(std::abs(prior.delta * slice.expiry / prior.alpha - sigma * sigma * slice.expiry) < 1e-12);
  CHECK(is_admissible(prior));

  slice.quotes.clear();
  CHECK_THROWS(bs_prior(slice));
}

TEST_CASE("projection lands in the admissible box") {
  const ParamBox box;
  const auto p = project_admissible({0.5, -5.0, 20.0, 0.0}, box, 1e-6);
  CHECK(is_admissible(p, 1e-6 * 0.999));
  CHECK(p.delta <= box.delta_hi);
  CHECK(p.alpha >= box.alpha_lo);
}
