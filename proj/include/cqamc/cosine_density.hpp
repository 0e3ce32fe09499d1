#pragma once

// Cosine-series recovery of marginal densities and distribution functions.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cqamc/nig.hpp"
#include "cqamc/numerics.hpp"
#include "cqamc/types.hpp"

namespace cqamc {

struct CosineSeries {
  Interval interval;
  std::vector<double> coeffs;

  std::size_t terms() const { return coeffs.size(); }
};

/// Orthonormal cosine basis on [a, b]; domain error outside.
double basis_gamma(std::size_t k, double x, const Interval& iv);

/// 1/2 + 1/2 sqrt((b-a)/2) gamma_k(x), which lies in [0, 1].
double basis_gamma_plus(std::size_t k, double x, const Interval& iv);

/// a_k from e = E[gamma+_k] under a law of total mass `mass`:
/// sqrt(2/(b-a)) (2 e - mass).
double coefficient_from_shifted(double shifted_mean, const Interval& iv, double mass = 1.0);

/// a_k = integral of pdf * gamma_k over iv by composite quadrature.
CosineSeries coeffs_classical(const std::function<double(double)>& pdf, const Interval& iv, std::size_t terms,
                              const QuadratureRule& rule = panel_rule(), std::size_t panels = 64);

/// Classical coefficients of the NIG density, panels sized to its curvature.
CosineSeries coeffs_nig(const NIGParams& p, double t, const Interval& iv, std::size_t terms);

/// a_k = sum_j m_j gamma_k(x_j): coefficients of a discrete (grid) law.
CosineSeries coeffs_from_masses(std::span<const double> nodes, std::span<const double> masses, const Interval& iv,
                                std::size_t terms);

/// Partial sum; may be negative in truncation lobes. Domain error outside.
double eval_pdf(const CosineSeries& s, double x);

/// 0 below a, 1 at or above b, otherwise sum a_k Gamma_k(x).
double eval_cdf(const CosineSeries& s, double x);

enum class DecayMode { algebraic, exponential };

struct KSelection {
  DecayMode mode = DecayMode::exponential;
  double zeta = 1.0;
  double rate = 1.0;  // m (algebraic) or nu (exponential)
  double epsilon = 1e-3;
};

/// Algebraic: ceil((4 zeta (b-a) / eps)^(1/m)); exponential:
/// ceil(log((4 zeta (b-a) / eps)^(1/nu))). At least 1.
std::size_t select_terms(const KSelection& sel, const Interval& iv);

struct DecayFit {
  double zeta = 0.0;  // exp(intercept)
  double nu = 0.0;    // -slope of log|a_k| against k
  double r2 = 0.0;
  std::size_t used = 0;
};

/// Least squares of log|a_k| on k over k >= 1, skipping coefficients below
/// `floor` times the largest magnitude.
DecayFit estimate_decay(const CosineSeries& s, double floor = 1e-13);

/// Cumulant rule with L = 10, widened by 2 until F(a) <= eps/2 and
/// F(b) >= 1 - eps. `L_used` receives the final L.
Interval choose_interval(const NIGParams& p, double t, double epsilon, double* L_used = nullptr);

/// Tightest interval meeting the same tail condition: a solves F(a) = eps/2
/// and b solves F(b) = 1 - eps (bisection on the tail integrals).
Interval tail_quantile_interval(const NIGParams& p, double t, double epsilon);

/// [x_l, x_u] with F(x_l) = left and 1 - F(x_u) = right.
Interval nig_quantile_range(const NIGParams& p, double t, double left, double right);

enum class IntervalRule { cumulant, tail_quantile };

Interval marginal_interval(const NIGParams& p, double t, double epsilon, IntervalRule rule);

/// Reference CDF of the NIG law on a sorted abscissa list by cumulative quadrature.
std::vector<double> nig_cdf_reference(const NIGParams& p, double t, std::span<const double> x);

struct SeriesError {
  double pdf_sup = 0.0;
  double cdf_sup = 0.0;
};

/// Sup errors of a series against the NIG law on `points` uniform abscissae of its interval.
SeriesError nig_series_error(const CosineSeries& s, const NIGParams& p, double t, std::size_t points = 2001);

}  // namespace cqamc
