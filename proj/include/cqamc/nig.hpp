#pragma once

// Normal Inverse Gaussian law and the exponential-NIG asset model.
//
// The log-return over a horizon t is X(t) ~ NIG(alpha, beta, delta*t, mu*t) and
//   S(T) = S0 * exp((r - q + omega) T + X(T)),
// where omega is the compensator making e^{-(r-q)T} S(T) a martingale.

#include <complex>
#include <cstddef>
#include <vector>

#include "cqamc/rng.hpp"
#include "cqamc/types.hpp"

namespace cqamc {

struct NIGParams {
  double alpha = 1.0;  // tail steepness
  double beta = 0.0;   // skew
  double delta = 1.0;  // scale
  double mu = 0.0;     // location

  double gamma() const;  // sqrt(alpha^2 - beta^2)
};

/// alpha > 0, delta > 0, alpha^2 - beta^2 > margin and alpha^2 - (beta+1)^2 > margin.
bool is_admissible(const NIGParams& p, double margin = 0.0);

/// Throws DomainError naming the first violated constraint.
void require_admissible(const NIGParams& p);

/// NIG density with (delta*t, mu*t) scaling.
double nig_pdf(double x, const NIGParams& p, double t = 1.0);

/// Levy symbol: log E[exp(iuX(1))].
std::complex<double> nig_char_exponent(double u, const NIGParams& p);

/// Martingale adjustment omega; requires (beta+1)^2 < alpha^2.
double martingale_adjustment(const NIGParams& p);

struct Cumulants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c4 = 0.0;

  /// sqrt(c2 + sqrt(c4)), the spread used by the truncation rule.
  double spread() const;
};

Cumulants nig_cumulants(const NIGParams& p, double t = 1.0);

/// [c1 - L*spread, c1 + L*spread].
Interval cumulant_interval(const NIGParams& p, double t, double L = 10.0);

/// Probability mass of X(t) below `a` and above `b`.
double nig_left_tail(const NIGParams& p, double t, double a);
double nig_right_tail(const NIGParams& p, double t, double b);

/// Interval outside of which the density carries at most `tol` mass on the
/// left and e^x-weighted mass at most `tol` (relative) on the right. Starts
/// from the L = 10 cumulant rule and widens in steps of 2.
Interval nig_support(const NIGParams& p, double t, double tol = 1e-14);

/// Composite Gauss-Legendre integral of g over an interval against the NIG
/// density. Panels are no wider than the density's curvature scale.
std::size_t nig_panel_count(const NIGParams& p, double t, const Interval& iv);

struct ExpNIGModel {
  NIGParams params;
  MarketSlice slice;

  /// (r - q + omega) T.
  double drift() const;
};

/// Density-quadrature European pricer. Density values on the panel nodes are
/// computed once, so pricing many strikes costs one density sweep.
class NigPricer {
 public:
  explicit NigPricer(const ExpNIGModel& model, double tail_tol = 1e-14);

  double price(double strike, OptionKind kind) const;
  /// E[S(T)] by quadrature.
  double expected_terminal() const;
  /// Integral of the density over the support.
  double total_mass() const;

  const Interval& support() const { return support_; }
  const ExpNIGModel& model() const { return model_; }

 private:
  // Integral of payoff(x) f(x) over [lo, hi] with a fresh panel rule.
  double partial(double lo, double hi, double strike, OptionKind kind) const;

  ExpNIGModel model_;
  Interval support_;
  double panel_width_ = 0.0;
  double log_spot_drift_ = 0.0;  // log S0 + drift
  std::vector<double> nodes_;
  std::vector<double> weighted_density_;  // w_i f(x_i)
  std::vector<double> panel_mass_;        // per panel: sum w f
  std::vector<double> panel_spot_mass_;   // per panel: sum w f S(x)
};

/// Discounted E[payoff(S(T))] by density quadrature.
double price_european(const ExpNIGModel& model, double strike, OptionKind kind);

/// Fourier-cosine price from the characteristic function.
double price_european_cos(const ExpNIGModel& model, double strike, OptionKind kind, std::size_t terms);

/// i.i.d. draws of X(t) through the normal variance-mean mixture with an
/// inverse-Gaussian mixing variable (Michael-Schucany-Haas).
std::vector<double> sample_nig(const NIGParams& p, double t, Rng& rng, std::size_t count);

/// Standard normal draw by inversion.
double standard_normal(Rng& rng);

}  // namespace cqamc
