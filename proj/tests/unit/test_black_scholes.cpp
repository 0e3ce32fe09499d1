#include <cmath>
#include <random>

#include "doctest.h"

#include "cqamc/black_scholes.hpp"
#include "cqamc/errors.hpp"
#include "cqamc/numerics.hpp"

using namespace cqamc;

TEST_CASE("bs call against lognormal payoff quadrature") {
  const BSInputs in{100, 100, 1, 0, 0, 0.2};
  const double s = 0.2;
  const double payoff = integrate_composite(
      [&](double z) { return (100 * std::exp(-0.5 * s * s + s * z) - 100) * std_normal_pdf(z); }, 0.5 * s, 12.0,
      gauss_legendre(32), 64);
  CHECK(bs_price(in, OptionKind::call) == doctest::Approx(payoff).epsilon(1e-12));
  CHECK(bs_price(in, OptionKind::call) == doctest::Approx(7.965567).epsilon(1e-6));
}

TEST_CASE("bs intrinsic limit at tiny vol") {
  const BSInputs in{100, 90, 1, 0.03, 0.01, 1e-6};
  const double df = std::exp(-0.03), fw = 100 * std::exp(0.02);
  CHECK(bs_price(in, OptionKind::call) == doctest::Approx(df * (fw - 90)).epsilon(1e-12));
}

TEST_CASE("bs put-call parity on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const BSInputs in{50 + 100 * u(rng), 50 + 100 * u(rng), 0.05 + 3 * u(rng), 0.1 * u(rng), 0.1 * u(rng),
                      0.05 + u(rng)};
    const double lhs = bs_price(in, OptionKind::call) - bs_price(in, OptionKind::put);
    const double rhs = in.spot * std::exp(-in.dividend * in.expiry) - in.strike * std::exp(-in.rate * in.expiry);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("bs rejects invalid inputs") {
  CHECK_THROWS_AS(bs_price({100, 100, 1, 0, 0, 0}, OptionKind::call), DomainError);
  CHECK_THROWS_AS(bs_price({-1, 100, 1, 0, 0, 0.2}, OptionKind::call), DomainError);
  CHECK_THROWS_AS(bs_price({100, 0, 1, 0, 0, 0.2}, OptionKind::call), DomainError);
  CHECK_THROWS_AS(bs_price({100, 100, 0, 0, 0, 0.2}, OptionKind::call), DomainError);
}

TEST_CASE("bs price strictly increasing in vol") {
  for (auto kind : {OptionKind::call, OptionKind::put}) {
    BSInputs in{100, 110, 0.5, 0.02, 0.01, 0.05};
    double prev = bs_price(in, kind);
    for (int i = 1; i <= 60; ++i) {
      in.vol = 0.05 + i * 0.025;
      const double v = bs_price(in, kind);
      CHECK(v > prev);
      CHECK(bs_vega(in) > 0.0);
      prev = v;
    }
  }
}

TEST_CASE("implied vol round trip") {
  for (auto kind : {OptionKind::call, OptionKind::put})
    for (double k : {70.0, 90.0, 100.0, 110.0, 130.0})
      for (double s = 0.05; s <= 2.0; s += 0.15) {
        BSInputs in{100, k, 1, 0.03, 0.01, s};
        const double p = bs_price(in, kind);
        const double iv = implied_vol(p, in, kind);
        CAPTURE(k);
        CAPTURE(s);
        in.vol = iv;
        CHECK(std::abs(bs_price(in, kind) - p) < 1e-10);
        // Deep in-the-money at low vol the price carries no vol information.
        in.vol = s;
        if (bs_vega(in) * 1e-8 > 1e-10) CHECK(std::abs(iv - s) < 1e-8);
      }
  for (double s = 0.05; s <= 2.0; s += 0.05) {
    const BSInputs in{100, 100, 1, 0.03, 0.01, s};
    CHECK(std::abs(implied_vol(bs_price(in, OptionKind::call), in, OptionKind::call) - s) < 1e-8);
  }
}

TEST_CASE("implied vol bounds and monotonicity") {
  BSInputs in{100, 80, 1, 0, 0, 0.2};
  CHECK_THROWS_AS(implied_vol(19.0, in, OptionKind::call), DomainError);
  CHECK_THROWS_AS(implied_vol(101.0, in, OptionKind::call), DomainError);
  in.strike = 100;
  const double lo = implied_vol(7.0, in, OptionKind::call);
  const double hi = implied_vol(9.0, in, OptionKind::call);
  CHECK(hi > lo);
  in.vol = 0.2;
  const double p = bs_price(in, OptionKind::call);
  in.vol = lo;
  CHECK(std::abs(bs_price(in, OptionKind::call) - 7.0) < 1e-10);
  CHECK(implied_vol(p, in, OptionKind::call) == doctest::Approx(0.2).epsilon(1e-10));
}
