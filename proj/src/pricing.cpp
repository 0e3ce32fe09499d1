#include "cqamc/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqamc/errors.hpp"
#include "cqamc/numerics.hpp"

namespace cqamc {
namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  double mean(std::size_t n) const { return sum / static_cast<double>(n); }
  double stderr_of_mean(std::size_t n) const {
    if (n < 2) return 0.0;
    const double m = mean(n);
    const double var = std::max(sum_sq / static_cast<double>(n) - m * m, 0.0) * static_cast<double>(n) /
                       static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

std::string_view to_string(PayoffKind k) {
  switch (k) {
    case PayoffKind::basket_call: return "basket-call";
    case PayoffKind::worst_of_put: return "worst-of-put";
    case PayoffKind::spread_call: return "spread-call";
  }
  return "unknown";
}

PayoffKind payoff_kind_from_string(std::string_view s) {
  if (s == "basket-call") return PayoffKind::basket_call;
  if (s == "worst-of-put") return PayoffKind::worst_of_put;
  if (s == "spread-call") return PayoffKind::spread_call;
  throw ValidationError("unknown payoff kind '" + std::string(s) + "'");
}

std::string_view to_string(Formulation f) { return f == Formulation::joint ? "joint" : "independent"; }

double eval_payoff(const Payoff& p, std::span<const double> s) {
  if (s.empty()) throw DomainError("eval_payoff: no assets");
  if (!(p.strike >= 0.0)) throw DomainError("eval_payoff: strike must be >= 0");
  switch (p.kind) {
    case PayoffKind::basket_call: {
      double avg = 0.0;
      if (p.weights.empty()) {
        for (double v : s) avg += v;
        avg /= static_cast<double>(s.size());
      } else {
        if (p.weights.size() != s.size()) throw DomainError("eval_payoff: weight count does not match assets");
        for (std::size_t i = 0; i < s.size(); ++i) avg += p.weights[i] * s[i];
      }
      return std::max(avg - p.strike, 0.0);
    }
    case PayoffKind::worst_of_put:
      return std::max(p.strike - *std::min_element(s.begin(), s.end()), 0.0);
    case PayoffKind::spread_call:
      if (s.size() != 2) throw DomainError("eval_payoff: spread option needs exactly two assets");
      return std::max(s[0] - s[1] - p.strike, 0.0);
  }
  return 0.0;
}

double MarginalAsset::price_at(double x) const { return spot * std::exp(log_drift + x); }

MarginalAsset make_marginal(const std::string& name, const ExpNIGModel& model, const MarginalOptions& opt) {
  const double t = model.slice.expiry;
  const Interval iv = marginal_interval(model.params, t, opt.tail_epsilon, opt.rule);
  MarginalAsset m;
  m.name = name;
  m.series = coeffs_nig(model.params, t, iv, opt.terms);
  m.spot = model.slice.spot;
  m.log_drift = model.drift();
  return m;
}

std::vector<CosineSeries> MultiAssetModel::series() const {
  std::vector<CosineSeries> out;
  for (const auto& a : assets) out.push_back(a.series);
  return out;
}

PricingGrid PricingGrid::build(std::span<const Interval> intervals, std::span<const std::size_t> qubits) {
  if (intervals.empty() || intervals.size() != qubits.size()) throw DomainError("PricingGrid: dimension mismatch");
  PricingGrid g;
  g.intervals.assign(intervals.begin(), intervals.end());
  g.qubits.assign(qubits.begin(), qubits.end());
  for (std::size_t d = 0; d < intervals.size(); ++d) {
    if (!(intervals[d].a < intervals[d].b)) throw DomainError("PricingGrid: empty interval");
    if (qubits[d] == 0 || qubits[d] > 20) throw DomainError("PricingGrid: qubits per dimension must be in [1, 20]");
    const std::size_t cells = std::size_t{1} << qubits[d];
    const double dx = intervals[d].width() / static_cast<double>(cells);
    std::vector<double> nodes(cells);
    for (std::size_t j = 0; j < cells; ++j) nodes[j] = intervals[d].a + (static_cast<double>(j) + 0.5) * dx;
    g.nodes.push_back(std::move(nodes));
    g.dx.push_back(dx);
  }
  if (g.total_qubits() > 26) throw DomainError("PricingGrid: too many qubits for the simulator");
  return g;
}

PricingGrid PricingGrid::on_model(const MultiAssetModel& model, std::size_t qubits_per_dim) {
  std::vector<Interval> ivs;
  for (const auto& a : model.assets) ivs.push_back(a.series.interval);
  const std::vector<std::size_t> q(ivs.size(), qubits_per_dim);
  return build(ivs, q);
}

PricingGrid PricingGrid::on_quantiles(const MultiAssetModel& model, std::size_t qubits_per_dim, double tau) {
  if (!(tau > 0.0 && tau < 0.5)) throw DomainError("PricingGrid: tail probability must lie in (0, 0.5)");
  std::vector<Interval> ivs;
  for (const auto& a : model.assets) {
    const MarginalSampler sampler(a.series);
    Interval iv;
    if (!sampler.quantile(tau, iv.a) || !sampler.quantile(1.0 - tau, iv.b) || !(iv.a < iv.b))
      throw DomainError("PricingGrid: quantile range of " + a.name + " is not resolvable");
    ivs.push_back(iv);
  }
  const std::vector<std::size_t> q(ivs.size(), qubits_per_dim);
  return build(ivs, q);
}

std::size_t PricingGrid::total() const {
  std::size_t n = 1;
  for (const auto& v : nodes) n *= v.size();
  return n;
}

std::size_t PricingGrid::total_qubits() const { return std::accumulate(qubits.begin(), qubits.end(), std::size_t{0}); }

void PricingGrid::unravel(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t d = nodes.size(); d-- > 0;) {
    idx[d] = flat % nodes[d].size();
    flat /= nodes[d].size();
  }
}

double GridLaw::joint_total() const { return std::accumulate(joint_mass.begin(), joint_mass.end(), 0.0); }

double GridLaw::independent_total() const {
  return std::accumulate(independent_mass.begin(), independent_mass.end(), 0.0);
}

std::vector<double> GridLaw::marginal_totals() const {
  std::vector<double> out;
  for (const auto& m : marginal_mass) out.push_back(std::accumulate(m.begin(), m.end(), 0.0));
  return out;
}

std::string_view to_string(CellMass m) { return m == CellMass::midpoint ? "midpoint" : "cell-probability"; }

CellMass cell_mass_from_string(std::string_view s) {
  if (s == "midpoint") return CellMass::midpoint;
  if (s == "cell-probability") return CellMass::cell_probability;
  throw ValidationError("unknown cell mass rule '" + std::string(s) + "'");
}

GridLaw discretize(const MultiAssetModel& model, const PricingGrid& grid, const Payoff& payoff, Exec exec,
                   CellMass rule) {
  const std::size_t n = model.dim();
  if (grid.dim() != n || model.copula.dim() != n) throw DomainError("discretize: dimension mismatch");
  GridLaw law;
  law.grid = grid;
  law.discount_factor = model.discount_factor;

  std::vector<std::vector<double>> z(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto& s = model.assets[d].series;
    const auto& x = grid.nodes[d];
    for (double v : x)
      if (!s.interval.contains(v)) throw DomainError("discretize: grid node outside the marginal interval");
    const auto f = cosine_eval(s.coeffs, s.interval, x, exec);
    auto F = cosine_eval_cdf(s.coeffs, s.interval, x, exec);
    std::vector<double> edge_cdf;
    if (rule == CellMass::cell_probability) {
      std::vector<double> edges(x.size() + 1);
      for (std::size_t j = 0; j < x.size(); ++j) edges[j] = x[j] - 0.5 * grid.dx[d];
      edges.back() = x.back() + 0.5 * grid.dx[d];
      edge_cdf = cosine_eval_cdf(s.coeffs, s.interval, edges, exec);
    }
    std::vector<double> m(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double cell = rule == CellMass::midpoint ? f[j] * grid.dx[d] : edge_cdf[j + 1] - edge_cdf[j];
      if (cell < 0.0) law.clipped_mass -= cell;
      m[j] = std::max(cell, 0.0);
      const double u = std::clamp(F[j], kUClamp, 1.0 - kUClamp);
      if (u != F[j]) ++law.clamped;
      z[d].push_back(std_normal_quantile(u));
    }
    law.marginal_mass.push_back(std::move(m));
    law.cdf.push_back(std::move(F));
  }

  const std::size_t total = grid.total();
  const bool identity = model.copula.is_identity();
  parallel_fill(
      law.copula, total,
      [&](std::size_t flat) {
        if (identity) return 1.0;
        std::vector<std::size_t> idx(n);
        std::vector<double> point(n);
        grid.unravel(flat, idx);
        for (std::size_t d = 0; d < n; ++d) point[d] = z[d][idx[d]];
        return gaussian_copula_density_z(point, model.copula);
      },
      exec);
  parallel_fill(
      law.independent_mass, total,
      [&](std::size_t flat) {
        std::vector<std::size_t> idx(n);
        grid.unravel(flat, idx);
        double prod = 1.0;
        for (std::size_t d = 0; d < n; ++d) prod *= law.marginal_mass[d][idx[d]];
        return prod;
      },
      exec);
  parallel_fill(
      law.payoff, total,
      [&](std::size_t flat) {
        std::vector<std::size_t> idx(n);
        std::vector<double> s(n);
        grid.unravel(flat, idx);
        for (std::size_t d = 0; d < n; ++d) s[d] = model.assets[d].price_at(grid.nodes[d][idx[d]]);
        return eval_payoff(payoff, s);
      },
      exec);
  law.joint_mass.resize(total);
  for (std::size_t j = 0; j < total; ++j) law.joint_mass[j] = law.copula[j] * law.independent_mass[j];

  law.c_max = grid_c_max(model.copula, law.cdf);
  law.payoff_max = *std::max_element(law.payoff.begin(), law.payoff.end());
  return law;
}

double riemann_reference(const GridLaw& law) {
  double acc = 0.0;
  for (std::size_t j = 0; j < law.joint_mass.size(); ++j) acc += law.joint_mass[j] * law.payoff[j];
  return law.discount_factor * acc;
}

double riemann_reference_independent(const GridLaw& law) {
  double acc = 0.0;
  for (std::size_t j = 0; j < law.independent_mass.size(); ++j)
    acc += law.independent_mass[j] * law.copula[j] * law.payoff[j];
  return law.discount_factor * acc;
}

Categorical::Categorical(std::span<const double> weights) {
  cum_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("Categorical: weights must be nonnegative");
    acc += w;
    cum_.push_back(acc);
  }
  if (!(acc > 0.0)) throw DomainError("Categorical: all weights are zero");
}

std::size_t Categorical::draw(Rng& rng) const {
  const double target = uniform_open(rng) * cum_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  return std::min(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
}

PriceEstimate cmc_price(const GridLaw& law, Formulation f, std::size_t samples, Rng& rng) {
  if (samples == 0) throw DomainError("cmc_price: samples must be >= 1");
  Moments mom;
  double scale = law.discount_factor;
  if (f == Formulation::joint) {
    const Categorical cat(law.joint_mass);
    scale *= cat.total();
    for (std::size_t l = 0; l < samples; ++l) mom.add(law.payoff[cat.draw(rng)]);
  } else {
    const std::size_t n = law.grid.dim();
    std::vector<Categorical> cats;
    for (const auto& m : law.marginal_mass) {
      cats.emplace_back(m);
      scale *= cats.back().total();
    }
    for (std::size_t l = 0; l < samples; ++l) {
      std::size_t flat = 0;
      for (std::size_t d = 0; d < n; ++d) flat = flat * law.grid.nodes[d].size() + cats[d].draw(rng);
      mom.add(law.copula[flat] * law.payoff[flat]);
    }
  }
  PriceEstimate e;
  e.value = scale * mom.mean(samples);
  e.stderr_or_eps = scale * mom.stderr_of_mean(samples);
  e.estimator = f == Formulation::joint ? "cmc-joint" : "cmc-independent";
  e.samples_or_queries = samples;
  return e;
}

MarginalSampler::MarginalSampler(const CosineSeries& series, std::size_t table) : series_(&series) {
  table = std::max<std::size_t>(table, 3);
  const Interval& iv = series.interval;
  x_.resize(table);
  for (std::size_t i = 0; i < table; ++i)
    x_[i] = iv.a + iv.width() * static_cast<double>(i) / static_cast<double>(table - 1);
  x_.back() = std::nextafter(iv.b, iv.a);
  raw_ = cosine_eval_cdf(series.coeffs, iv, x_, Exec::serial);
  env_ = raw_;
  for (std::size_t i = 1; i < env_.size(); ++i) env_[i] = std::max(env_[i], env_[i - 1]);
}

bool MarginalSampler::quantile(double u, double& x) const {
  if (!(u > env_.front() && u < env_.back())) return false;
  const auto it = std::upper_bound(env_.begin(), env_.end(), u);
  const std::size_t hi = static_cast<std::size_t>(it - env_.begin());
  const std::size_t lo = hi - 1;
  if (raw_[lo] == env_[lo] && raw_[hi] == env_[hi]) {
    double a = x_[lo];
    double b = x_[hi];
    while (b - a > 1e-10) {
      const double m = 0.5 * (a + b);
      (eval_cdf(*series_, m) <= u ? a : b) = m;
    }
    x = 0.5 * (a + b);
    return true;
  }
  ++fallbacks_;
  const double w = (u - env_[lo]) / (env_[hi] - env_[lo]);
  x = x_[lo] + w * (x_[hi] - x_[lo]);
  return true;
}

PriceEstimate cmc_price_continuous(const MultiAssetModel& model, const Payoff& payoff, Formulation f,
                                   std::size_t samples, Rng& rng) {
  if (samples == 0) throw DomainError("cmc_price_continuous: samples must be >= 1");
  const std::size_t n = model.dim();
  if (model.copula.dim() != n) throw DomainError("cmc_price_continuous: dimension mismatch");
  std::vector<MarginalSampler> samplers;
  samplers.reserve(n);
  for (const auto& a : model.assets) samplers.emplace_back(a.series);

  Moments mom;
  std::size_t resamples = 0;
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  std::vector<double> u(n);
  std::vector<double> s(n);
  for (std::size_t l = 0; l < samples;) {
    if (f == Formulation::joint) {
      for (std::size_t d = 0; d < n; ++d) g[static_cast<Eigen::Index>(d)] = standard_normal(rng);
      const Eigen::VectorXd zc = model.copula.chol * g;
      for (std::size_t d = 0; d < n; ++d) u[d] = std_normal_cdf(zc[static_cast<Eigen::Index>(d)]);
    } else {
      for (std::size_t d = 0; d < n; ++d) u[d] = uniform_open(rng);
    }
    bool ok = true;
    for (std::size_t d = 0; d < n && ok; ++d) {
      double x = 0.0;
      ok = samplers[d].quantile(u[d], x);
      s[d] = model.assets[d].price_at(x);
    }
    if (!ok) {
      ++resamples;
      if (resamples > 100 * samples + 1000) throw ConvergenceError("cmc_price_continuous: quantile inversion keeps failing");
      continue;
    }
    double v = eval_payoff(payoff, s);
    if (f == Formulation::independent) v *= copula_density_clamped(u, model.copula);
    mom.add(v);
    ++l;
  }
  PriceEstimate e;
  e.value = model.discount_factor * mom.mean(samples);
  e.stderr_or_eps = model.discount_factor * mom.stderr_of_mean(samples);
  e.estimator = f == Formulation::joint ? "cmc-joint" : "cmc-independent";
  e.samples_or_queries = samples;
  e.resamples = resamples;
  return e;
}

}  // namespace cqamc
