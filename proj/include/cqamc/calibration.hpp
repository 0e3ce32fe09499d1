#pragma once

// Tikhonov-regularized, constrained least-squares fit of NIG parameters to
// the option mids of one expiry.

#include <cstddef>
#include <vector>

#include "cqamc/errors.hpp"
#include "cqamc/nig.hpp"
#include "cqamc/types.hpp"

namespace cqamc {

enum class WeightRule { inverse_spread, uniform };

struct ParamBox {
  double alpha_lo = 0.6;
  double alpha_hi = 100.0;
  double beta_lo = -100.0;
  double beta_hi = 100.0;
  double delta_lo = 1e-3;
  double delta_hi = 10.0;
};

struct Lattice {
  std::vector<double> alpha{2.0, 4.0, 6.0, 8.0};
  std::vector<double> beta{-4.0, -2.0, 0.0};
  std::vector<double> delta{0.1, 0.2, 0.4};
};

struct Tolerances {
  std::size_t max_iterations = 200;
  double ftol = 1e-12;  // relative objective decrease
  double xtol = 1e-10;  // relative step size
  double gtol = 1e-14;  // projected gradient (scaled)
};

struct CalibrationConfig {
  double lambda = 5e-7;
  NIGParams prior{10.0, 0.0, 0.4, 0.0};
  WeightRule weights = WeightRule::inverse_spread;
  double weight_floor = 1e-4;           // currency
  double admissibility_margin = 1e-6;   // on alpha^2 - beta^2 and alpha^2 - (beta+1)^2
  ParamBox bounds;
  Lattice grid;
  Tolerances tol;
};

struct CalibrationResult {
  NIGParams theta;  // mu = 0
  double objective = 0.0;
  std::vector<double> residuals;  // model - mid, per usable quote
  double rmse_bp = 0.0;           // residual RMSE in basis points of spot
  double max_err_bp = 0.0;
  std::size_t iterations = 0;
  std::size_t n_quotes = 0;
  NIGParams start;  // grid-search point
  double start_objective = 0.0;
  std::size_t lattice_points = 0;  // admissible lattice points evaluated
  std::vector<NIGParams> trace;    // accepted iterates, start first
};

/// Raised when no admissible iterate has a finite objective.
class CalibrationFailure : public ConvergenceError {
 public:
  CalibrationFailure(const std::string& what, NIGParams best)
      : ConvergenceError(what), best_(best) {}
  const NIGParams& best() const noexcept { return best_; }

 private:
  NIGParams best_;
};

/// Weights per quote according to the configured rule.
std::vector<double> quote_weights(const std::vector<OptionQuote>& quotes, const CalibrationConfig& config);

/// Model prices of the slice's usable quotes (positive bid).
std::vector<double> model_prices(const NIGParams& theta, const MarketSlice& slice);

/// J(theta) = sum_m w_m (V_m - mid_m)^2 + lambda |theta - theta0|^2 over
/// (alpha, beta, delta), evaluated on the slice's usable quotes.
double objective(const NIGParams& theta, const MarketSlice& slice, const CalibrationConfig& config);

/// Admissible lattice point with the smallest objective (first index on ties).
NIGParams grid_init(const MarketSlice& slice, const CalibrationConfig& config);

/// Projected Levenberg-Marquardt from the grid-search start. mu is fixed at 0.
CalibrationResult calibrate(const MarketSlice& slice, const CalibrationConfig& config);

/// Black-Scholes prior: ATM implied vol (strike nearest the forward) mapped to
/// beta0 = 0, alpha0 = 10, delta0 * T / alpha0 = sigma_atm^2 * T.
NIGParams bs_prior(const MarketSlice& slice, double* sigma_atm = nullptr);

/// Projection onto the box intersected with the admissibility margin.
NIGParams project_admissible(const NIGParams& p, const ParamBox& box, double margin);

}  // namespace cqamc
