#pragma once

// Multi-asset payoffs, the discretized joint law shared by every estimator,
// Riemann reference prices and classical Monte Carlo.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cqamc/copula.hpp"
#include "cqamc/cosine_density.hpp"
#include "cqamc/kernels.hpp"
#include "cqamc/nig.hpp"
#include "cqamc/rng.hpp"

namespace cqamc {

enum class PayoffKind { basket_call, worst_of_put, spread_call };

std::string_view to_string(PayoffKind k);
PayoffKind payoff_kind_from_string(std::string_view s);

struct Payoff {
  PayoffKind kind = PayoffKind::basket_call;
  double strike = 0.0;
  std::vector<double> weights;  // basket only; empty means 1/N
};

/// Nonnegative payoff at terminal prices s. Spread needs exactly two assets.
double eval_payoff(const Payoff& p, std::span<const double> s);

/// One marginal: cosine series of the log-return X(T) and the map to S(T).
struct MarginalAsset {
  std::string name;
  CosineSeries series;
  double spot = 0.0;
  double log_drift = 0.0;  // (r - q + omega) T

  double price_at(double x) const;
};

struct MarginalOptions {
  std::size_t terms = 128;
  double tail_epsilon = 1e-6;
  IntervalRule rule = IntervalRule::tail_quantile;
};

/// Classical cosine recovery of the exponential-NIG marginal.
MarginalAsset make_marginal(const std::string& name, const ExpNIGModel& model, const MarginalOptions& opt = {});

struct MultiAssetModel {
  std::vector<MarginalAsset> assets;
  CopulaSpec copula;
  double discount_factor = 1.0;

  std::size_t dim() const { return assets.size(); }
  std::vector<CosineSeries> series() const;
};

/// Midpoint nodes of 2^n equal cells on each marginal interval.
struct PricingGrid {
  std::vector<Interval> intervals;
  std::vector<std::size_t> qubits;
  std::vector<std::vector<double>> nodes;
  std::vector<double> dx;

  static PricingGrid build(std::span<const Interval> intervals, std::span<const std::size_t> qubits);
  /// Grid over each asset's series interval with n qubits per dimension.
  static PricingGrid on_model(const MultiAssetModel& model, std::size_t qubits_per_dim);
  /// Grid over [F_i^{-1}(tau), F_i^{-1}(1 - tau)] of each recovered marginal.
  static PricingGrid on_quantiles(const MultiAssetModel& model, std::size_t qubits_per_dim, double tau);

  std::size_t dim() const { return nodes.size(); }
  std::size_t total() const;
  std::size_t total_qubits() const;
  /// Flat index to per-dimension indices, last dimension fastest.
  void unravel(std::size_t flat, std::span<std::size_t> idx) const;
};

inline constexpr double kDefaultGridTail = 1e-3;

/// Cell mass: f(midpoint) dx, or the recovered cell probability F(right) - F(left).
enum class CellMass { midpoint, cell_probability };

std::string_view to_string(CellMass m);
CellMass cell_mass_from_string(std::string_view s);

/// Everything the estimators need on one grid.
struct GridLaw {
  PricingGrid grid;
  std::vector<std::vector<double>> marginal_mass;  // per CellMass rule, negatives clipped
  std::vector<std::vector<double>> cdf;            // F_i at nodes
  std::vector<double> copula;                      // c at each flat node
  std::vector<double> joint_mass;                  // c * prod marginal_mass
  std::vector<double> independent_mass;            // prod marginal_mass
  std::vector<double> payoff;                      // h at each flat node
  double c_max = 1.0;
  double payoff_max = 0.0;
  double clipped_mass = 0.0;  // total negative cell mass removed
  std::size_t clamped = 0;    // CDF values clamped before the normal quantile
  double discount_factor = 1.0;

  double joint_total() const;
  double independent_total() const;
  std::vector<double> marginal_totals() const;
};

GridLaw discretize(const MultiAssetModel& model, const PricingGrid& grid, const Payoff& payoff,
                   Exec exec = Exec::parallel, CellMass rule = CellMass::midpoint);

/// DF * sum_j m_j h(x_j) over the joint cell masses.
double riemann_reference(const GridLaw& law);

/// Same value through the independent formulation: DF * sum prod(m_i) c h.
double riemann_reference_independent(const GridLaw& law);

enum class Formulation { joint, independent };
enum class SamplingMode { grid, continuous };

std::string_view to_string(Formulation f);

struct PriceEstimate {
  double value = 0.0;  // discounted
  double stderr_or_eps = 0.0;
  std::string estimator;
  std::size_t samples_or_queries = 0;
  double target_epsilon = 0.0;
  std::size_t repetitions = 1;
  std::size_t resamples = 0;  // continuous mode: draws rejected outside the recovered CDF range
};

/// Inverse of a recovered CDF: bisection on F-hat inside brackets of its
/// monotone envelope, linear interpolation of the envelope where F-hat wiggles.
class MarginalSampler {
 public:
  explicit MarginalSampler(const CosineSeries& series, std::size_t table = 4097);

  /// x with F-hat(x) = u; returns false when u lies outside the recovered range.
  bool quantile(double u, double& x) const;
  std::size_t envelope_fallbacks() const { return fallbacks_; }

 private:
  const CosineSeries* series_;
  std::vector<double> x_;
  std::vector<double> env_;
  std::vector<double> raw_;
  mutable std::size_t fallbacks_ = 0;
};

/// Grid mode draws nodes from the discretized law (the distribution the
/// amplitude estimators load); continuous mode samples the recovered
/// marginals by inversion.
PriceEstimate cmc_price(const GridLaw& law, Formulation f, std::size_t samples, Rng& rng);
PriceEstimate cmc_price_continuous(const MultiAssetModel& model, const Payoff& payoff, Formulation f,
                                   std::size_t samples, Rng& rng);

/// Categorical sampler over nonnegative weights (inverse CDF on cumulative sums).
class Categorical {
 public:
  explicit Categorical(std::span<const double> weights);
  std::size_t draw(Rng& rng) const;
  double total() const { return cum_.empty() ? 0.0 : cum_.back(); }

 private:
  std::vector<double> cum_;
};

}  // namespace cqamc
