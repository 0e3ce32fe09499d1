#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"

#include "cqamc/errors.hpp"
#include "cqamc/fixtures.hpp"
#include "cqamc/nig.hpp"
#include "cqamc/numerics.hpp"

using namespace cqamc;

namespace {

const NIGParams kAxa{5.24, -3.26, 0.18, 0.0};

double density_moment(const NIGParams& p, double t, int order, double center) {
  const Interval iv = nig_support(p, t);
  return integrate_composite([&](double x) { return std::pow(x - center, order) * nig_pdf(x, p, t); }, iv.a, iv.b,
                             panel_rule(), nig_panel_count(p, t, iv));
}

}  // namespace

TEST_CASE("admissibility") {
  CHECK(is_admissible(kAxa));
  CHECK_FALSE(is_admissible({1.0, 0.5, 1.0, 0.0}));   // (beta+1)^2 >= alpha^2
  CHECK_FALSE(is_admissible({1.0, -1.0, 1.0, 0.0}));  // beta^2 >= alpha^2
  CHECK_FALSE(is_admissible({2.0, 0.0, 0.0, 0.0}));
  CHECK_THROWS_AS(require_admissible({-1.0, 0.0, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(nig_pdf(0.0, {1.0, 1.5, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(nig_pdf(0.0, kAxa, 0.0), DomainError);
}

TEST_CASE("nig pdf symmetry, positivity and normalization") {
  const NIGParams sym{3.0, 0.0, 0.5, 0.0};
  for (double x : {0.01, 0.3, 1.0, 4.0}) CHECK(std::abs(nig_pdf(x, sym) - nig_pdf(-x, sym)) <= 1e-14 * nig_pdf(x, sym));
  for (const auto& a : fixtures::all()) {
    CAPTURE(a.name);
    CHECK(std::abs(density_moment(a.params, 1.0, 0, 0.0) - 1.0) <= 1e-9);
    const Interval iv = cumulant_interval(a.params, 1.0);
    for (int i = 0; i <= 50; ++i) CHECK(nig_pdf(iv.a + iv.width() * i / 50, a.params) > 0.0);
  }
}

TEST_CASE("nig pdf mode is negative for negative skew") {
  double lo = -1.0, hi = 1.0;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (nig_pdf(x1, kAxa) > nig_pdf(x2, kAxa))
      hi = x2;
    else
      lo = x1;
  }
  CHECK(0.5 * (lo + hi) < 0.0);
}

TEST_CASE("nig pdf is shift equivariant in mu") {
  NIGParams shifted = kAxa;
  shifted.mu = 0.4;
  const double t = 0.7;
  for (double x : {-0.5, -0.1, 0.0, 0.2, 0.6}) CHECK(nig_pdf(x, shifted, t) == nig_pdf(x - 0.4 * t, kAxa, t));
}

TEST_CASE("characteristic exponent") {
  const auto z = nig_char_exponent(0.0, kAxa);
  CHECK(z.real() == 0.0);
  CHECK(z.imag() == 0.0);
  NIGParams p = kAxa;
  p.mu = 0.3;
  for (double u : {0.5, 2.0, 17.0}) {
    const auto a = nig_char_exponent(u, p), b = nig_char_exponent(-u, p);
    CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-14));
    CHECK(a.imag() == doctest::Approx(-b.imag()).epsilon(1e-14));
  }
}

TEST_CASE("fourier inversion of the characteristic function matches the pdf") {
  const double x = 0.1;
  const double inv = integrate_composite(
                         [&](double u) {
                           const auto phi = std::exp(nig_char_exponent(u, kAxa) - std::complex<double>(0, u * x));
                           return phi.real();
                         },
                         0.0, 250.0, gauss_legendre(32), 200) /
                     std::numbers::pi;
  CHECK(std::abs(inv - nig_pdf(x, kAxa)) < 1e-8);
}

TEST_CASE("martingale adjustment") {
  const NIGParams p{3.0, 0.0, 0.5, 0.0};
  CHECK(martingale_adjustment(p) == doctest::Approx(0.5 * (std::sqrt(8.0) - 3.0)).epsilon(1e-15));
  NIGParams q = kAxa;
  q.mu = 0.37;
  CHECK(martingale_adjustment(q) - martingale_adjustment(kAxa) == doctest::Approx(-0.37).epsilon(1e-12));
  CHECK_THROWS_AS(martingale_adjustment({1.0, 0.2, 1.0, 0.0}), DomainError);

  for (const auto& a : fixtures::all()) {
    const NigPricer pricer(fixtures::model_for(a));
    CHECK(std::abs(pricer.expected_terminal() / fixtures::slice_for(a).forward - 1.0) <= 1e-7);
  }
}

TEST_CASE("cumulants") {
  const auto c0 = nig_cumulants({3.0, 0.0, 0.5, 0.0});
  CHECK(c0.c1 == 0.0);
  CHECK(c0.c2 > 0.0);
  const auto c = nig_cumulants(kAxa);
  CHECK(c.c2 > 0.0);
  CHECK(c.c4 > 0.0);
  const double m1 = density_moment(kAxa, 1.0, 1, 0.0);
  const double m2 = density_moment(kAxa, 1.0, 2, c.c1);
  CHECK(std::abs(m1 - c.c1) < 1e-8);
  CHECK(std::abs(m2 - c.c2) < 1e-8);
}

TEST_CASE("european pricing identities") {
  const auto a = fixtures::axa();
  const auto model = fixtures::model_for(a);
  const auto& s = model.slice;
  const double small = price_european(model, 1e-6, OptionKind::call);
  CHECK(std::abs(small / (s.discount_factor * s.forward) - 1.0) < 1e-6);

  ExpNIGModel shifted = model;
  shifted.params.mu = 0.7;
  for (double k : {20.0, 30.0, 33.8, 40.0, 50.0}) {
    CHECK(std::abs(price_european(shifted, k, OptionKind::call) - price_european(model, k, OptionKind::call)) <= 1e-9);
    const double parity = price_european(model, k, OptionKind::call) - price_european(model, k, OptionKind::put);
    CHECK(std::abs(parity - s.discount_factor * (s.forward - k)) <= 1e-9);
  }
}

TEST_CASE("european prices are monotone in strike") {
  const NigPricer pricer(fixtures::model_for(fixtures::michelin()));
  double prev_call = 1e300, prev_put = -1.0;
  for (int i = 0; i <= 40; ++i) {
    const double k = 10.0 + i;
    const double c = pricer.price(k, OptionKind::call), p = pricer.price(k, OptionKind::put);
    CHECK(c < prev_call);
    CHECK(p > prev_put);
    prev_call = c;
    prev_put = p;
  }
}

TEST_CASE("cos pricer agrees with density quadrature at 1024 terms") {
  for (const auto& a : fixtures::all()) {
    const auto model = fixtures::model_for(a);
    const NigPricer pricer(model);
    for (int i = 0; i < 21; ++i) {
      const double k = a.spot * (0.7 + 0.03 * i);
      for (auto kind : {OptionKind::call, OptionKind::put}) {
        const double ref = pricer.price(k, kind);
        const double cos = price_european_cos(model, k, kind, 1024);
        CAPTURE(a.name);
        CAPTURE(k);
        CHECK(std::abs(cos - ref) <= 1e-6 * ref);
        CHECK(cos >= 0.0);
      }
    }
  }
}

TEST_CASE("cos error shrinks as terms double") {
  const auto model = fixtures::model_for(fixtures::axa());
  const double ref = price_european(model, 33.8, OptionKind::call);
  double prev = 1e300;
  for (std::size_t n = 16; n <= 256; n *= 2) {
    const double err = std::abs(price_european_cos(model, 33.8, OptionKind::call, n) - ref);
    CAPTURE(n);
    CHECK((err < prev || err < 1e-12));
    prev = err;
  }
  CHECK_THROWS_AS(price_european_cos(model, 33.8, OptionKind::call, 8), DomainError);
}

TEST_CASE("nig sampling") {
  auto rng = make_stream(42);
  const std::size_t n = 1000000;
  const auto xs = sample_nig(kAxa, 1.0, rng, n);
  REQUIRE(xs.size() == n);
  const auto c = nig_cumulants(kAxa);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  CHECK(std::abs(mean - c.c1) < 4 * std::sqrt(c.c2 / n));

  const NIGParams sym{5.0, 0.0, 0.5, 0.0};
  auto rng2 = make_stream(5);
  const std::size_t m = 200000;
  const auto ys = sample_nig(sym, 1.0, rng2, m);
  double m2 = 0, m3 = 0;
  for (double y : ys) m2 += y * y / m, m3 += y * y * y / m;
  const double skew = m3 / std::pow(m2, 1.5);
  CHECK(std::abs(skew) < 4 * std::sqrt(15.0 / m));

  auto r1 = make_stream(9), r2 = make_stream(9);
  CHECK(sample_nig(kAxa, 1.0, r1, 100) == sample_nig(kAxa, 1.0, r2, 100));
}
