#include <cmath>
#include <random>

#include "doctest.h"

#include "cqamc/copula.hpp"
#include "cqamc/errors.hpp"
#include "cqamc/fixtures.hpp"

using namespace cqamc;

namespace {

CopulaSpec rho_spec(double rho) {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, rho, rho, 1.0;
  return CopulaSpec::from_matrix(s);
}

std::vector<double> midpoints(const Interval& iv, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = iv.a + iv.width() * (j + 0.5) / n;
  return x;
}

}  // namespace

TEST_CASE("copula density values") {
  const auto id = CopulaSpec::identity(3);
  CHECK(id.is_identity());
  const std::vector<double> u{0.1, 0.5, 0.97};
  CHECK(gaussian_copula_density(u, id) == 1.0);

  const auto s = rho_spec(-0.25);
  const std::vector<double> half{0.5, 0.5};
  CHECK(gaussian_copula_density(half, s) == doctest::Approx(1.0 / std::sqrt(0.9375)).epsilon(1e-14));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0.01, 0.99);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> a{d(rng), d(rng)}, b{a[1], a[0]};
    CHECK(gaussian_copula_density(a, s) == doctest::Approx(gaussian_copula_density(b, s)).epsilon(1e-14));
    CHECK(gaussian_copula_density(a, s) > 0.0);
  }
  const std::vector<double> edge{0.0, 0.5};
  CHECK_THROWS_AS(gaussian_copula_density(edge, s), DomainError);
  const std::vector<double> one{0.5, 1.0};
  CHECK_THROWS_AS(gaussian_copula_density(one, s), DomainError);
  std::size_t clamped = 0;
  CHECK(copula_density_clamped(edge, s, &clamped) > 0.0);
  CHECK(clamped == 1);
}

TEST_CASE("correlation matrix validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.3, 0.2, 1.0;
  CHECK_THROWS_AS(CopulaSpec::from_matrix(bad), ValidationError);
  bad << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(CopulaSpec::from_matrix(bad), ValidationError);
  bad << 1.0, 1.5, 1.5, 1.0;
  CHECK_THROWS_AS(CopulaSpec::from_matrix(bad), ValidationError);
  const auto s = rho_spec(0.4);
  CHECK(s.det == doctest::Approx(0.84).epsilon(1e-14));
  CHECK((s.chol * s.chol.transpose() - s.sigma).norm() < 1e-14);
  CHECK((s.inv * s.sigma - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("joint pdf with identity correlation is the product of marginals") {
  const auto m = fixtures::spread_model();
  const auto series = m.series();
  const auto id = CopulaSpec::identity(2);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> x(2);
    for (int d = 0; d < 2; ++d) {
      const auto& iv = series[d].interval;
      x[d] = iv.a + iv.width() * std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    }
    const double prod = eval_pdf(series[0], x[0]) * eval_pdf(series[1], x[1]);
    CHECK(std::abs(joint_pdf(x, series, id) - prod) <= 1e-14 * std::max(1.0, prod));
  }
}

TEST_CASE("joint pdf normalization and marginal consistency") {
  const auto m = fixtures::spread_model();
  const auto series = m.series();
  const std::size_t n = 256;
  const auto x0 = midpoints(series[0].interval, n), x1 = midpoints(series[1].interval, n);
  const double dx0 = series[0].interval.width() / n, dx1 = series[1].interval.width() / n;
  double total = 0.0;
  std::vector<double> marg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double> x{x0[i], x1[j]};
      const double f = joint_pdf(x, series, m.copula);
      total += f * dx0 * dx1;
      marg[i] += f * dx1;
    }
  CHECK(std::abs(total - 1.0) < 2e-3);
  for (std::size_t i = n / 8; i < n; i += n / 8) CHECK(std::abs(marg[i] - eval_pdf(series[0], x0[i])) < 2e-2);
}

TEST_CASE("exchangeability") {
  const auto m = fixtures::basket_model();
  auto series = m.series();
  const std::vector<double> x{0.05, -0.1, 0.02};
  const double base = joint_pdf(x, series, m.copula);
  const std::vector<int> perm{2, 0, 1};
  Eigen::MatrixXd ps(3, 3);
  std::vector<CosineSeries> pser;
  std::vector<double> px;
  for (int i = 0; i < 3; ++i) {
    pser.push_back(series[perm[i]]);
    px.push_back(x[perm[i]]);
    for (int j = 0; j < 3; ++j) ps(i, j) = m.copula.sigma(perm[i], perm[j]);
  }
  CHECK(joint_pdf(px, pser, CopulaSpec::from_matrix(ps)) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("adjusted payoff") {
  const auto m = fixtures::spread_model();
  const auto series = m.series();
  const std::vector<double> x{0.0, 0.05};
  auto id = CopulaSpec::identity(2);
  CHECK(adjusted_payoff(x, 0.37, series, id) == 0.37);
  auto spec = m.copula;
  spec.c_max = 10.0;
  CHECK(adjusted_payoff(x, 0.0, series, spec) == 0.0);
  const double v = adjusted_payoff(x, 1.0, series, spec);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
  spec.c_max = 0.5;
  CHECK_THROWS_AS(adjusted_payoff(x, 1.0, series, spec), DomainError);
  CHECK_THROWS_AS(adjusted_payoff(x, 1.5, series, id), DomainError);
}

TEST_CASE("grid c_max") {
  const std::vector<std::vector<double>> u{{0.1, 0.5, 0.9}, {0.2, 0.5, 0.8}};
  CHECK(grid_c_max(CopulaSpec::identity(2), u) == 1.0);
  const auto s = rho_spec(-0.25);
  CHECK(grid_c_max(s, u) >= 1.0 / std::sqrt(0.9375));

  double prev = 0.0;
  for (double tail : {0.2, 0.05, 1e-2, 1e-3, 1e-5}) {
    const std::vector<std::vector<double>> g{{tail, 0.5, 1 - tail}, {tail, 0.5, 1 - tail}};
    const double c = grid_c_max(s, g);
    CHECK(c > prev);
    prev = c;
  }
  CHECK(grid_c_prime_max(s, u) > 0.0);
  CHECK(grid_c_prime_max(CopulaSpec::identity(2), u) == 0.0);
}
