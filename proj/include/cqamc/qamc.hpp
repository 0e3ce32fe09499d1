#pragma once

// Ideal statevector simulation of amplitude-loading oracles, iterative and
// signed amplitude estimation, and the Monte Carlo estimators built on them.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cqamc/pricing.hpp"
#include "cqamc/rng.hpp"
#include "cqamc/types.hpp"

namespace cqamc {

/// Data register of `data_qubits` qubits plus one ancilla. Basis index
/// j + anc * 2^data_qubits.
struct Statevector {
  std::size_t data_qubits = 0;
  std::vector<std::complex<double>> amplitudes;

  explicit Statevector(std::size_t data_qubits);

  std::size_t data_size() const { return std::size_t{1} << data_qubits; }
  std::size_t qubit_count() const { return data_qubits + 1; }
  double norm() const;
  /// Probability of measuring the ancilla in |1>.
  double ancilla_one_probability() const;
  /// Marginal distribution of the data register.
  std::vector<double> data_distribution() const;
};

enum class OracleLabel { coefficient, joint_price, independent_price };

std::string_view to_string(OracleLabel l);

/// A = sum_j sqrt(p_j) |j>, followed by the ancilla rotation
/// |j>|0> -> |j>(sqrt(1 - phi_j)|0> + sqrt(phi_j)|1>).
struct AmplitudeOracle {
  std::vector<double> probabilities;  // p_j, sums to 1
  std::vector<double> values;         // phi_j in [0, 1]
  std::size_t data_qubits = 0;
  double clipped_mass = 0.0;  // negative input mass removed before normalization
  double input_mass = 0.0;    // sum of the clipped input masses
  OracleLabel label = OracleLabel::coefficient;

  /// sum_j p_j phi_j, the amplitude being estimated.
  double amplitude() const;
  /// U|0>: density loading then payoff rotation.
  Statevector prepare() const;
};

/// Density-loading part of the oracle. Negative masses are clipped and
/// recorded; the length must be a power of two. Domain error if all zero.
AmplitudeOracle build_density_oracle(std::span<const double> masses);

/// Loads |j>|0> amplitudes from `masses` into a fresh state.
Statevector load_density(const AmplitudeOracle& oracle);

/// R_y rotation of the ancilla controlled on each data basis state, with
/// sin^2 of the half angle equal to phi_j. Domain error if phi_j is not in [0, 1].
void apply_payoff_rotation(Statevector& state, std::span<const double> phi);

/// Attaches payoff values to a density oracle (domain error outside [0, 1]).
void set_payoff(AmplitudeOracle& oracle, std::span<const double> phi);

/// One Grover iterate (2|psi><psi| - I) S_chi, with psi = U|0> and S_chi the
/// sign flip of the ancilla-|1> subspace.
void grover_operator(Statevector& state, const Statevector& psi);

/// G^m U|0>.
Statevector amplified_state(const AmplitudeOracle& oracle, std::size_t m);

struct AEConfig {
  double epsilon = 1e-3;
  double rho = 0.05;
  std::size_t max_grover_depth = std::size_t{1} << 20;
  std::uint64_t seed = 0;
  std::size_t shots = 100;
  std::size_t max_queries = 0;  // 0: unlimited; otherwise stop before a round would exceed it
};

struct AEResult {
  double estimate = 0.0;
  double half_width = 0.0;
  std::size_t oracle_queries = 0;
  std::size_t shots_used = 0;
  std::size_t rounds = 0;
  bool is_signed = false;
  bool capped = false;  // stopped by max_grover_depth or max_queries before reaching epsilon
};

/// Iterative amplitude estimation (Chernoff confidence intervals) for an
/// amplitude a in [0, 1]. Measurements at Grover depth k are Bernoulli with
/// success probability sin^2((2k + 1) theta), sin^2(theta) = a. A round of s
/// shots at depth k costs (2k + 1) s oracle queries.
AEResult iqae_from_amplitude(double a, const AEConfig& cfg, Rng& rng);

/// Same, with a read from the simulated state U|0>.
AEResult iqae_estimate(const AmplitudeOracle& oracle, const AEConfig& cfg);

/// Signed target t = 2a - 1 in [-1, 1], where the oracle loads a = (1 + t) / 2.
/// Estimate and half width are mapped through t = 2a - 1.
AEResult signed_ae_estimate(const AmplitudeOracle& oracle, const AEConfig& cfg);

struct CoefficientEstimate {
  double value = 0.0;
  double half_width = 0.0;
  std::size_t oracle_queries = 0;
  bool capped = false;
};

/// a_k of the grid law (masses at `nodes`) via shifted-basis amplitude
/// estimation: sqrt(2/(b-a)) (2 E[gamma+_k] - Z) with Z the total mass.
/// cfg.epsilon is the amplitude-level target.
CoefficientEstimate qamc_coefficient(std::span<const double> nodes, std::span<const double> masses, std::size_t k,
                                     const Interval& iv, const AEConfig& cfg);

/// Oracle of one pricing formulation and the factor mapping its amplitude
/// to the undiscounted grid price.
struct PriceOracle {
  AmplitudeOracle oracle;
  double scale = 0.0;
};

PriceOracle price_oracle(const GridLaw& law, Formulation f);

/// Discounted grid price by amplitude estimation; stderr_or_eps holds the
/// half width in currency.
PriceEstimate qamc_price(const GridLaw& law, Formulation f, const AEConfig& cfg);

/// CSV run log `algo,target,epsilon,rho,estimate,abs_err,queries,seed`.
struct RunLogEntry {
  std::string algo;
  double target = 0.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double estimate = 0.0;
  std::size_t queries = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kRunLogHeader = "algo,target,epsilon,rho,estimate,abs_err,queries,seed";

void write_run_log_line(std::ostream& os, const RunLogEntry& e);

}  // namespace cqamc
