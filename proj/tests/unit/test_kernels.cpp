#include <cmath>
#include <random>

#include "doctest.h"

#include "cqamc/cosine_density.hpp"
#include "cqamc/kernels.hpp"

using namespace cqamc;

TEST_CASE("kernels agree bitwise between serial and parallel paths") {
  const Interval iv{-1.5, 0.8};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(iv.a, iv.b);
  std::vector<double> x(5000), w(5000), a(64);
  for (auto& v : x) v = u(rng);
  for (auto& v : w) v = std::abs(u(rng));
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = u(rng) / (1.0 + k);

  CHECK(cosine_projection(x, w, iv, 64, Exec::serial) == cosine_projection(x, w, iv, 64, Exec::parallel));
  CHECK(cosine_eval(a, iv, x, Exec::serial) == cosine_eval(a, iv, x, Exec::parallel));
  CHECK(cosine_eval_cdf(a, iv, x, Exec::serial) == cosine_eval_cdf(a, iv, x, Exec::parallel));

  std::vector<double> s, p;
  parallel_fill(s, 1000, [](std::size_t j) { return std::sin(0.1 * j); }, Exec::serial);
  parallel_fill(p, 1000, [](std::size_t j) { return std::sin(0.1 * j); }, Exec::parallel);
  CHECK(s == p);
}

TEST_CASE("kernels match the scalar series routines") {
  const Interval iv{0.0, 2.0};
  const CosineSeries s{iv, {0.5, 0.1, -0.05, 0.02}};
  const std::vector<double> x{-1.0, 0.0, 0.3, 1.1, 1.99, 2.0, 3.0};
  const auto cdf = cosine_eval_cdf(s.coeffs, iv, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(cdf[i] == doctest::Approx(eval_cdf(s, x[i])).epsilon(1e-14));
  const std::vector<double> inside{0.0, 0.3, 1.1, 2.0};
  const auto pdf = cosine_eval(s.coeffs, iv, inside);
  for (std::size_t i = 0; i < inside.size(); ++i) CHECK(pdf[i] == doctest::Approx(eval_pdf(s, inside[i])).epsilon(1e-14));

  const std::vector<double> w{0.2, 0.3, 0.5};
  const std::vector<double> n{0.1, 0.9, 1.7};
  const auto c = cosine_projection(n, w, iv, 4);
  const auto ref = coeffs_from_masses(n, w, iv, 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(c[k] == doctest::Approx(ref.coeffs[k]).epsilon(1e-14));
}
