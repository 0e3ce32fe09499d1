#include "cqamc/numerics.hpp"

#include <cmath>
#include <numbers>

namespace cqamc {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

void require_positive_finite(double z, const char* who) {
  if (!std::isfinite(z) || z <= 0.0) throw DomainError(std::string(who) + ": argument must be finite and > 0");
}

// Power series about zero; accurate for z <= 2.
double k1_series(double z) {
  const double y = 0.25 * z * z;
  double term = 1.0;  // (z^2/4)^k / (k! (k+1)!)
  double psi_k1 = -kEulerGamma;        // psi(k+1)
  double psi_k2 = 1.0 - kEulerGamma;   // psi(k+2)
  double i1_sum = 0.0;
  double psi_sum = 0.0;
  for (int k = 0; k < 60; ++k) {
    i1_sum += term;
    psi_sum += (psi_k1 + psi_k2) * term;
    if (term < 1e-18 * i1_sum) break;
    term *= y / ((k + 1.0) * (k + 2.0));
    psi_k1 += 1.0 / (k + 1.0);
    psi_k2 += 1.0 / (k + 2.0);
  }
  const double i1 = 0.5 * z * i1_sum;
  return 1.0 / z + std::log(0.5 * z) * i1 - 0.25 * z * psi_sum;
}

// Steed's continued fraction (CF2) for z > 2, returning e^z K1(z).
double k1e_continued_fraction(double z) {
  double b = 2.0 * (1.0 + z);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 100000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < 1e-17) break;
  }
  h = a1 * h;
  const double k0e = std::sqrt(std::numbers::pi / (2.0 * z)) / s;
  return k0e * (z + 0.5 - h) / z;
}

QuadratureRule make_gauss_legendre(std::size_t n) {
  if (n < 2) throw DomainError("gauss_legendre: need at least 2 nodes");
  QuadratureRule rule;
  rule.kind = QuadratureKind::gauss_legendre;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

double bessel_k1(double z) {
  require_positive_finite(z, "bessel_k1");
  if (z <= 2.0) return k1_series(z);
  return k1e_continued_fraction(z) * std::exp(-z);
}

double bessel_k1e(double z) {
  require_positive_finite(z, "bessel_k1e");
  if (z <= 2.0) return k1_series(z) * std::exp(z);
  return k1e_continued_fraction(z);
}

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite input");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("std_normal_quantile: u must lie in (0, 1)");
  // Upper half by reflection; 1 - u is exact for u >= 0.5.
  if (u > 0.5) return -std_normal_quantile(1.0 - u);

  // Acklam's rational approximation, relative error ~1.2e-9.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758276161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= step / (1.0 + 0.5 * x * step);
  return x;
}

QuadratureRule gauss_legendre(std::size_t n) { return make_gauss_legendre(n); }

QuadratureRule trapezoid(std::size_t n) {
  if (n < 2) throw DomainError("trapezoid: need at least 2 nodes");
  QuadratureRule rule;
  rule.kind = QuadratureKind::trapezoid;
  const double h = 2.0 / static_cast<double>(n - 1);
  rule.nodes.resize(n);
  rule.weights.assign(n, h);
  for (std::size_t i = 0; i < n; ++i) rule.nodes[i] = -1.0 + h * static_cast<double>(i);
  rule.nodes.back() = 1.0;
  rule.weights.front() = rule.weights.back() = 0.5 * h;
  return rule;
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = make_gauss_legendre(256);
  return rule;
}

const QuadratureRule& panel_rule() {
  static const QuadratureRule rule = make_gauss_legendre(16);
  return rule;
}

}  // namespace cqamc
