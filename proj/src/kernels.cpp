#include "cqamc/kernels.hpp"

#include <cmath>
#include <numbers>

#include "cqamc/errors.hpp"

namespace cqamc {
namespace {

void require_interval(const Interval& iv) {
  if (!(iv.a < iv.b)) throw DomainError("interval must satisfy a < b");
}

double project_one(std::size_t k, std::span<const double> x, std::span<const double> w, const Interval& iv) {
  const double len = iv.width();
  const double scale = k == 0 ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
  const double freq = static_cast<double>(k) * std::numbers::pi / len;
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * std::cos(freq * (x[j] - iv.a));
  return scale * acc;
}

double eval_one(std::span<const double> a, const Interval& iv, double x) {
  const double len = iv.width();
  const double u = std::numbers::pi * (x - iv.a) / len;
  double acc = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) acc += a[k] * std::cos(static_cast<double>(k) * u);
  return (a.empty() ? 0.0 : a[0] / std::sqrt(len)) + std::sqrt(2.0 / len) * acc;
}

double eval_cdf_one(std::span<const double> a, const Interval& iv, double x) {
  if (x < iv.a) return 0.0;
  if (x >= iv.b) return 1.0;
  const double len = iv.width();
  const double u = std::numbers::pi * (x - iv.a) / len;
  double acc = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) acc += a[k] * std::sin(static_cast<double>(k) * u) / static_cast<double>(k);
  const double head = a.empty() ? 0.0 : a[0] * (x - iv.a) / std::sqrt(len);
  return head + std::sqrt(2.0 * len) / std::numbers::pi * acc;
}

}  // namespace

std::vector<double> cosine_projection(std::span<const double> x, std::span<const double> w, const Interval& iv,
                                      std::size_t terms, Exec exec) {
  require_interval(iv);
  if (x.size() != w.size()) throw DomainError("cosine_projection: size mismatch");
  std::vector<double> out;
  parallel_fill(out, terms, [&](std::size_t k) { return project_one(k, x, w, iv); }, exec);
  return out;
}

std::vector<double> cosine_eval(std::span<const double> coeffs, const Interval& iv, std::span<const double> x,
                                Exec exec) {
  require_interval(iv);
  std::vector<double> out;
  parallel_fill(out, x.size(), [&](std::size_t j) { return eval_one(coeffs, iv, x[j]); }, exec);
  return out;
}

std::vector<double> cosine_eval_cdf(std::span<const double> coeffs, const Interval& iv, std::span<const double> x,
                                    Exec exec) {
  require_interval(iv);
  std::vector<double> out;
  parallel_fill(out, x.size(), [&](std::size_t j) { return eval_cdf_one(coeffs, iv, x[j]); }, exec);
  return out;
}

}  // namespace cqamc
