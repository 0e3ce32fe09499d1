#include "cqamc/qamc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>

#include "cqamc/cosine_density.hpp"
#include "cqamc/errors.hpp"

namespace cqamc {
namespace {

constexpr double kPi = std::numbers::pi;

std::size_t log2_exact(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) throw DomainError("oracle: register length must be a power of two");
  return static_cast<std::size_t>(std::countr_zero(n));
}

void check_unit_range(std::span<const double> phi) {
  for (double v : phi)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("payoff rotation: values must lie in [0, 1]");
}

std::size_t draw_ones(double prob, std::size_t shots, Rng& rng) {
  std::size_t ones = 0;
  for (std::size_t s = 0; s < shots; ++s)
    if (uniform_open(rng) < prob) ++ones;
  return ones;
}

// Largest admissible scaling 4k+2 at least twice the current one whose
// multiple of the theta interval stays inside one half circle.
std::pair<std::size_t, bool> find_next_k(std::size_t k, bool upper, double theta_l, double theta_u) {
  const double old_scaling = 4.0 * static_cast<double>(k) + 2.0;
  const double width = theta_u - theta_l;
  if (!(width > 0.0)) return {k, upper};
  const double max_scaling_d = std::min(1.0 / (2.0 * width), 1e18);
  long long scaling = static_cast<long long>(max_scaling_d);
  scaling -= (scaling - 2) % 4;
  while (static_cast<double>(scaling) >= 2.0 * old_scaling) {
    const double s = static_cast<double>(scaling);
    const double lo = s * theta_l - std::floor(s * theta_l);
    const double hi = s * theta_u - std::floor(s * theta_u);
    if (lo <= hi && hi <= 0.5) return {static_cast<std::size_t>((scaling - 2) / 4), true};
    if (hi >= 0.5 && hi >= lo && lo >= 0.5) return {static_cast<std::size_t>((scaling - 2) / 4), false};
    scaling -= 4;
  }
  return {k, upper};
}

double sin2(double theta) {
  const double s = std::sin(2.0 * kPi * theta);
  return s * s;
}

}  // namespace

Statevector::Statevector(std::size_t n) : data_qubits(n), amplitudes(std::size_t{2} << n) {
  amplitudes[0] = 1.0;
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const auto& c : amplitudes) acc += std::norm(c);
  return std::sqrt(acc);
}

double Statevector::ancilla_one_probability() const {
  double acc = 0.0;
  for (std::size_t j = data_size(); j < amplitudes.size(); ++j) acc += std::norm(amplitudes[j]);
  return acc;
}

std::vector<double> Statevector::data_distribution() const {
  const std::size_t n = data_size();
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = std::norm(amplitudes[j]) + std::norm(amplitudes[j + n]);
  return p;
}

std::string_view to_string(OracleLabel l) {
  switch (l) {
    case OracleLabel::coefficient: return "U_ak";
    case OracleLabel::joint_price: return "U_V";
    case OracleLabel::independent_price: return "U_Vind";
  }
  return "unknown";
}

double AmplitudeOracle::amplitude() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) acc += probabilities[j] * values[j];
  return std::clamp(acc, 0.0, 1.0);
}

Statevector AmplitudeOracle::prepare() const {
  Statevector s = load_density(*this);
  apply_payoff_rotation(s, values);
  return s;
}

AmplitudeOracle build_density_oracle(std::span<const double> masses) {
  AmplitudeOracle o;
  o.data_qubits = log2_exact(masses.size());
  o.probabilities.resize(masses.size());
  for (std::size_t j = 0; j < masses.size(); ++j) {
    if (!std::isfinite(masses[j])) throw DomainError("density oracle: non-finite mass");
    if (masses[j] < 0.0) o.clipped_mass -= masses[j];
    o.probabilities[j] = std::max(masses[j], 0.0);
    o.input_mass += o.probabilities[j];
  }
  if (!(o.input_mass > 0.0)) throw DomainError("density oracle: all cell masses are zero");
  for (double& p : o.probabilities) p /= o.input_mass;
  o.values.assign(masses.size(), 0.0);
  return o;
}

Statevector load_density(const AmplitudeOracle& oracle) {
  Statevector s(oracle.data_qubits);
  for (std::size_t j = 0; j < oracle.probabilities.size(); ++j) s.amplitudes[j] = std::sqrt(oracle.probabilities[j]);
  return s;
}

void apply_payoff_rotation(Statevector& state, std::span<const double> phi) {
  const std::size_t n = state.data_size();
  if (phi.size() != n) throw DomainError("payoff rotation: value count does not match the register");
  check_unit_range(phi);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sqrt(phi[j]);
    const double c = std::sqrt(1.0 - phi[j]);
    const auto a0 = state.amplitudes[j];
    const auto a1 = state.amplitudes[j + n];
    state.amplitudes[j] = c * a0 - s * a1;
    state.amplitudes[j + n] = s * a0 + c * a1;
  }
}

void set_payoff(AmplitudeOracle& oracle, std::span<const double> phi) {
  if (phi.size() != oracle.probabilities.size()) throw DomainError("payoff rotation: value count does not match the register");
  check_unit_range(phi);
  oracle.values.assign(phi.begin(), phi.end());
}

void grover_operator(Statevector& state, const Statevector& psi) {
  if (state.amplitudes.size() != psi.amplitudes.size()) throw DomainError("grover_operator: register size mismatch");
  const std::size_t n = state.data_size();
  for (std::size_t j = n; j < state.amplitudes.size(); ++j) state.amplitudes[j] = -state.amplitudes[j];
  std::complex<double> overlap = 0.0;
  for (std::size_t j = 0; j < psi.amplitudes.size(); ++j) overlap += std::conj(psi.amplitudes[j]) * state.amplitudes[j];
  for (std::size_t j = 0; j < psi.amplitudes.size(); ++j)
    state.amplitudes[j] = 2.0 * overlap * psi.amplitudes[j] - state.amplitudes[j];
}

Statevector amplified_state(const AmplitudeOracle& oracle, std::size_t m) {
  const Statevector psi = oracle.prepare();
  Statevector s = psi;
  for (std::size_t i = 0; i < m; ++i) grover_operator(s, psi);
  return s;
}

AEResult iqae_from_amplitude(double a, const AEConfig& cfg, Rng& rng) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw DomainError("iqae: epsilon must lie in (0, 1)");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw DomainError("iqae: rho must lie in (0, 1)");
  if (cfg.shots == 0) throw DomainError("iqae: shots must be >= 1");
  if (!(a >= -1e-12 && a <= 1.0 + 1e-12)) throw DomainError("iqae: amplitude must lie in [0, 1]");
  a = std::clamp(a, 0.0, 1.0);
  const double theta = std::asin(std::sqrt(a));

  const double max_rounds = std::floor(std::log(2.0 * kPi / 8.0 / cfg.epsilon) / std::log(2.0)) + 1.0;
  const double log_term = std::log(2.0 * max_rounds / cfg.rho);

  AEResult r;
  double theta_l = 0.0;
  double theta_u = 0.25;
  double a_l = 0.0;
  double a_u = 1.0;
  std::size_t k = 0;
  bool upper = true;
  std::size_t last_k = 0;
  std::size_t acc_ones = 0;
  std::size_t acc_shots = 0;
  bool first = true;

  while (r.rounds == 0 || a_u - a_l > 2.0 * cfg.epsilon) {
    auto [next_k, next_upper] = find_next_k(k, upper, theta_l, theta_u);
    if (next_k > cfg.max_grover_depth ||
        (cfg.max_queries && r.oracle_queries + (2 * next_k + 1) * cfg.shots > cfg.max_queries)) {
      r.capped = true;
      break;
    }
    k = next_k;
    upper = next_upper;

    const double p = std::pow(std::sin((2.0 * static_cast<double>(k) + 1.0) * theta), 2);
    const std::size_t ones = draw_ones(p, cfg.shots, rng);
    r.oracle_queries += (2 * k + 1) * cfg.shots;
    r.shots_used += cfg.shots;
    ++r.rounds;
    if (!first && k == last_k) {
      acc_ones += ones;
      acc_shots += cfg.shots;
    } else {
      acc_ones = ones;
      acc_shots = cfg.shots;
    }
    first = false;
    last_k = k;

    const double prob = static_cast<double>(acc_ones) / static_cast<double>(acc_shots);
    const double eps = std::sqrt(3.0 * log_term / static_cast<double>(acc_shots));
    const double p_min = std::max(0.0, prob - eps);
    const double p_max = std::min(1.0, prob + eps);
    double t_min;
    double t_max;
    if (upper) {
      t_min = std::acos(1.0 - 2.0 * p_min) / (2.0 * kPi);
      t_max = std::acos(1.0 - 2.0 * p_max) / (2.0 * kPi);
    } else {
      t_min = 1.0 - std::acos(1.0 - 2.0 * p_max) / (2.0 * kPi);
      t_max = 1.0 - std::acos(1.0 - 2.0 * p_min) / (2.0 * kPi);
    }
    const double scaling = 4.0 * static_cast<double>(k) + 2.0;
    const double new_u = (std::floor(scaling * theta_u) + t_max) / scaling;
    const double new_l = (std::floor(scaling * theta_l) + t_min) / scaling;
    theta_l = std::max(theta_l, new_l);
    theta_u = std::min(theta_u, new_u);
    if (theta_u < theta_l) theta_u = theta_l;
    a_l = sin2(theta_l);
    a_u = sin2(theta_u);
  }

  r.estimate = 0.5 * (a_l + a_u);
  r.half_width = 0.5 * (a_u - a_l);
  return r;
}

AEResult iqae_estimate(const AmplitudeOracle& oracle, const AEConfig& cfg) {
  Rng rng = make_stream(cfg.seed);
  return iqae_from_amplitude(oracle.prepare().ancilla_one_probability(), cfg, rng);
}

AEResult signed_ae_estimate(const AmplitudeOracle& oracle, const AEConfig& cfg) {
  AEResult r = iqae_estimate(oracle, cfg);
  r.estimate = 2.0 * r.estimate - 1.0;
  r.half_width *= 2.0;
  r.is_signed = true;
  return r;
}

CoefficientEstimate qamc_coefficient(std::span<const double> nodes, std::span<const double> masses, std::size_t k,
                                     const Interval& iv, const AEConfig& cfg) {
  if (nodes.size() != masses.size()) throw DomainError("qamc_coefficient: node and mass counts differ");
  AmplitudeOracle o = build_density_oracle(masses);
  o.label = OracleLabel::coefficient;
  if (k == 0) {
    // gamma+_0 is constant, so the amplitude is known without sampling.
    CoefficientEstimate c;
    c.value = o.input_mass / std::sqrt(iv.width());
    return c;
  }
  std::vector<double> phi(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) phi[j] = std::clamp(basis_gamma_plus(k, nodes[j], iv), 0.0, 1.0);
  set_payoff(o, phi);
  const AEResult r = iqae_estimate(o, cfg);
  CoefficientEstimate c;
  c.value = coefficient_from_shifted(o.input_mass * r.estimate, iv, o.input_mass);
  c.half_width = 2.0 * std::sqrt(2.0 / iv.width()) * o.input_mass * r.half_width;
  c.oracle_queries = r.oracle_queries;
  c.capped = r.capped;
  return c;
}

PriceOracle price_oracle(const GridLaw& law, Formulation f) {
  if (!(law.payoff_max > 0.0)) throw DomainError("price_oracle: payoff vanishes on the grid");
  PriceOracle po;
  std::vector<double> phi(law.payoff.size());
  if (f == Formulation::joint) {
    po.oracle = build_density_oracle(law.joint_mass);
    po.oracle.label = OracleLabel::joint_price;
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = law.payoff[j] / law.payoff_max;
    po.scale = po.oracle.input_mass * law.payoff_max;
  } else {
    po.oracle = build_density_oracle(law.independent_mass);
    po.oracle.label = OracleLabel::independent_price;
    for (std::size_t j = 0; j < phi.size(); ++j) {
      if (law.copula[j] > law.c_max * (1.0 + 1e-12))
        throw DomainError("price_oracle: copula density exceeds c_max (stale bound)");
      phi[j] = law.copula[j] * law.payoff[j] / (law.c_max * law.payoff_max);
    }
    po.scale = po.oracle.input_mass * law.c_max * law.payoff_max;
  }
  for (double& v : phi) v = std::clamp(v, 0.0, 1.0);
  set_payoff(po.oracle, phi);
  return po;
}

PriceEstimate qamc_price(const GridLaw& law, Formulation f, const AEConfig& cfg) {
  const PriceOracle po = price_oracle(law, f);
  const AEResult r = iqae_estimate(po.oracle, cfg);
  PriceEstimate e;
  e.value = law.discount_factor * po.scale * r.estimate;
  e.stderr_or_eps = law.discount_factor * po.scale * r.half_width;
  e.estimator = f == Formulation::joint ? "qamc-joint" : "qamc-independent";
  e.samples_or_queries = r.oracle_queries;
  e.target_epsilon = cfg.epsilon;
  return e;
}

void write_run_log_line(std::ostream& os, const RunLogEntry& e) {
  const auto old = os.precision(17);
  os << e.algo << ',' << e.target << ',' << e.epsilon << ',' << e.rho << ',' << e.estimate << ','
     << std::abs(e.estimate - e.target) << ',' << e.queries << ',' << e.seed << '\n';
  os.precision(old);
}

}  // namespace cqamc
