#pragma once

// Special functions and quadrature shared by every pricing and density routine.

#include <cstddef>
#include <vector>

#include "cqamc/errors.hpp"

namespace cqamc {

/// Modified Bessel function of the second kind, order one.
/// Domain error for z <= 0 or non-finite z; underflows to 0 for very large z.
double bessel_k1(double z);

/// Exponentially scaled K1: e^z * K1(z). Never underflows for finite z > 0.
double bessel_k1e(double z);

double std_normal_pdf(double x);

/// Phi(x) via erfc; domain error on non-finite input.
double std_normal_cdf(double x);

/// Inverse of Phi on (0, 1). Rational initial guess refined by one Halley step.
double std_normal_quantile(double u);

enum class QuadratureKind { gauss_legendre, trapezoid };

/// Reference rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadratureKind kind = QuadratureKind::gauss_legendre;

  std::size_t size() const { return nodes.size(); }
};

QuadratureRule gauss_legendre(std::size_t n);
QuadratureRule trapezoid(std::size_t n);

/// Rule used for density and pricing integrals unless a caller picks another.
const QuadratureRule& default_rule();

/// Nodes per panel for composite integration of NIG-type integrands.
const QuadratureRule& panel_rule();

/// Sum of w_i f(x_i) with the rule mapped affinely onto [lo, hi].
template <class F>
double integrate(F&& f, double lo, double hi, const QuadratureRule& rule) {
  if (!(lo < hi)) throw DomainError("integrate: require lo < hi");
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * acc;
}

/// Composite version: [lo, hi] is split into `panels` equal pieces.
template <class F>
double integrate_composite(F&& f, double lo, double hi, const QuadratureRule& rule,
                           std::size_t panels) {
  if (!(lo < hi)) throw DomainError("integrate_composite: require lo < hi");
  if (panels == 0) panels = 1;
  const double width = (hi - lo) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = lo + width * static_cast<double>(p);
    const double b = (p + 1 == panels) ? hi : a + width;
    acc += integrate(f, a, b, rule);
  }
  return acc;
}

}  // namespace cqamc
