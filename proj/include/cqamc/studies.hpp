#pragma once

// Convergence studies: cosine coefficients, density recovery at matched cost,
// and option prices, each comparing classical Monte Carlo with amplitude
// estimation over seeded repetitions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cqamc/kernels.hpp"
#include "cqamc/nig.hpp"
#include "cqamc/pricing.hpp"
#include "cqamc/qamc.hpp"

namespace cqamc {

struct ConvergenceRecord {
  std::string method;  // cmc, qamc, qamc-joint, qamc-independent
  double cost = 0.0;   // mean samples or oracle queries per estimate
  double mean_abs_err = 0.0;
  double ci90_lo = 0.0;
  double ci90_hi = 0.0;
  std::size_t repetitions = 0;
  double level = 0.0;  // sample count or amplitude-level epsilon that produced the row
};

/// Linear interpolation between order statistics, q in [0, 1].
double percentile(std::vector<double> v, double q);

/// Mean and empirical 5th/95th percentiles of per-repetition errors.
ConvergenceRecord summarize(std::string method, double cost, double level, std::span<const double> errors);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
};

/// Least squares of log(mean_abs_err) on log(cost), dropping `trim` points
/// at each end of the ladder. Domain error with fewer than two points left.
LineFit fit_loglog(std::span<const ConvergenceRecord> records, std::size_t trim = 1);

/// Cost at which the fitted line reaches `error`.
double cost_at_error(const LineFit& fit, double error);

std::vector<ConvergenceRecord> records_of(std::span<const ConvergenceRecord> all, const std::string& method);

/// Grid of 2^qubits midpoint cells on an interval with midpoint pdf masses.
struct MarginalGrid {
  Interval interval;
  std::vector<double> nodes;
  std::vector<double> masses;
};

/// Cells over the [tau, 1 - tau] quantile range of the NIG law.
MarginalGrid nig_marginal_grid(const NIGParams& p, double t, std::size_t qubits, double tau);

/// 2^lo, 2^(lo+1), ..., 2^hi.
std::vector<std::size_t> pow2_ladder(std::size_t lo, std::size_t hi);

/// start, start/2, ..., count values.
std::vector<double> halving_ladder(double start, std::size_t count);

struct CoeffStudyConfig {
  NIGParams params{5.24, -3.26, 0.18, 0.0};
  double expiry = 1.0;
  std::size_t qubits = 5;
  std::size_t terms = 16;
  std::size_t repetitions = 32;
  std::vector<std::size_t> samples = pow2_ladder(8, 18);  // increasing
  std::vector<double> epsilons = halving_ladder(0.05, 10);  // amplitude level, decreasing
  double rho = 0.05;
  double grid_tail = kDefaultGridTail;
  std::uint64_t seed = 1;
  std::size_t k_low = 1;
  std::size_t k_high = 12;
  std::size_t ratio_samples = 4096;
  double ratio_epsilon = 1.5625e-3;

  void validate() const;
};

struct CoeffStudyResult {
  MarginalGrid grid;
  std::vector<double> truth;  // grid coefficients
  std::vector<ConvergenceRecord> records;
  LineFit cmc_fit;
  LineFit qamc_fit;
  std::vector<double> cmc_per_k;   // mean |error| per k at ratio_samples
  std::vector<double> qamc_per_k;  // mean |error| per k at ratio_epsilon
  double cmc_ratio = 0.0;          // error(k_high) / error(k_low)
  double qamc_ratio = 0.0;
  std::vector<RunLogEntry> run_log;
};

CoeffStudyResult study_coeffs(const CoeffStudyConfig& cfg, Exec exec = Exec::parallel);

struct DensityStudyConfig {
  NIGParams params{5.24, -3.26, 0.18, 0.0};
  double expiry = 1.0;
  std::size_t qubits = 5;
  std::vector<std::size_t> terms{8, 16, 32};
  std::size_t cost = 5000;  // samples, or queries per coefficient
  std::size_t repetitions = 32;
  double rho = 0.05;
  double grid_tail = kDefaultGridTail;
  std::uint64_t seed = 2;
  std::size_t points = 2001;

  void validate() const;
};

struct DensityRow {
  std::size_t terms = 0;
  std::string method;  // grid, cmc, qamc
  double pdf_sup_mean = 0.0;
  double pdf_sup_median = 0.0;
  double pdf_sup_lo = 0.0;
  double pdf_sup_hi = 0.0;
  double cdf_sup_mean = 0.0;
  double cdf_sup_median = 0.0;
  double cdf_sup_lo = 0.0;
  double cdf_sup_hi = 0.0;
  double mean_cost = 0.0;
};

struct DensityStudyResult {
  MarginalGrid grid;
  std::vector<DensityRow> rows;
};

DensityStudyResult study_density(const DensityStudyConfig& cfg, Exec exec = Exec::parallel);

struct PriceStudyConfig {
  std::string name = "price";
  std::size_t qubits = 3;  // per dimension
  double grid_tail = kDefaultGridTail;
  CellMass cell_mass = CellMass::cell_probability;
  std::size_t repetitions = 32;
  std::vector<std::size_t> samples = pow2_ladder(8, 20);
  std::vector<double> epsilons = halving_ladder(1e-2, 10);
  double rho = 0.05;
  double target_error = 1e-3;
  std::uint64_t seed = 3;

  void validate() const;
};

struct PriceStudyResult {
  std::string name;
  double reference = 0.0;
  double joint_mass = 0.0;
  double c_max = 0.0;
  double payoff_max = 0.0;
  std::vector<ConvergenceRecord> records;
  LineFit cmc_fit;
  LineFit joint_fit;
  LineFit independent_fit;
  double cmc_cost = 0.0;  // at target_error, from the fits
  double joint_cost = 0.0;
  double independent_cost = 0.0;
  std::vector<RunLogEntry> run_log;
};

PriceStudyResult study_price(const MultiAssetModel& model, const Payoff& payoff, const PriceStudyConfig& cfg,
                             Exec exec = Exec::parallel);

}  // namespace cqamc
