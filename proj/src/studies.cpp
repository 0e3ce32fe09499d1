#include "cqamc/studies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqamc/cosine_density.hpp"
#include "cqamc/errors.hpp"

namespace cqamc {
namespace {

template <class F>
void for_tasks(std::size_t n, F&& f, Exec exec) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) f(i);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return make_stream(seed, stream)(); }

void require_ladders(const std::vector<std::size_t>& samples, const std::vector<double>& epsilons) {
  if (samples.empty()) throw ValidationError("study config: sample ladder is empty");
  if (epsilons.empty()) throw ValidationError("study config: epsilon ladder is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] == 0) throw ValidationError("study config: sample counts must be >= 1");
    if (i && samples[i] <= samples[i - 1]) throw ValidationError("study config: sample ladder must be increasing");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0 && epsilons[i] < 1.0)) throw ValidationError("study config: epsilon must lie in (0, 1)");
    if (i && epsilons[i] >= epsilons[i - 1]) throw ValidationError("study config: epsilon ladder must be decreasing");
  }
}

void require_common(std::size_t repetitions, double rho, double tail) {
  if (repetitions == 0) throw ValidationError("study config: repetitions must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("study config: rho must lie in (0, 1)");
  if (!(tail > 0.0 && tail < 0.5)) throw ValidationError("study config: grid tail must lie in (0, 0.5)");
}

// Coefficients of the empirical law of `samples` draws from the grid masses.
std::vector<double> cmc_coefficients(const MarginalGrid& g, const Categorical& cat, std::size_t samples,
                                     std::size_t terms, Rng& rng) {
  std::vector<double> w(g.nodes.size(), 0.0);
  for (std::size_t l = 0; l < samples; ++l) w[cat.draw(rng)] += 1.0;
  const double scale = cat.total() / static_cast<double>(samples);
  for (double& v : w) v *= scale;
  return cosine_projection(g.nodes, w, g.interval, terms, Exec::serial);
}

double mean_error_k1(const std::vector<double>& est, const std::vector<double>& truth) {
  double acc = 0.0;
  for (std::size_t k = 1; k < truth.size(); ++k) acc += std::abs(est[k] - truth[k]);
  return acc / static_cast<double>(truth.size() - 1);
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw DomainError("percentile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ConvergenceRecord summarize(std::string method, double cost, double level, std::span<const double> errors) {
  ConvergenceRecord r;
  r.method = std::move(method);
  r.cost = cost;
  r.level = level;
  r.repetitions = errors.size();
  r.mean_abs_err = mean(errors);
  const std::vector<double> v(errors.begin(), errors.end());
  r.ci90_lo = std::min(percentile(v, 0.05), r.mean_abs_err);
  r.ci90_hi = std::max(percentile(v, 0.95), r.mean_abs_err);
  return r;
}

LineFit fit_loglog(std::span<const ConvergenceRecord> records, std::size_t trim) {
  if (records.size() < 2 * trim + 2) throw DomainError("fit_loglog: too few ladder points");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = trim; i + trim < records.size(); ++i) {
    if (!(records[i].cost > 0.0 && records[i].mean_abs_err > 0.0)) continue;
    x.push_back(std::log(records[i].cost));
    y.push_back(std::log(records[i].mean_abs_err));
  }
  if (x.size() < 2) throw DomainError("fit_loglog: too few positive points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_loglog: costs do not vary");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.used = x.size();
  return f;
}

double cost_at_error(const LineFit& fit, double error) {
  if (!(error > 0.0) || fit.slope == 0.0) throw DomainError("cost_at_error: needs error > 0 and a nonzero slope");
  return std::exp((std::log(error) - fit.intercept) / fit.slope);
}

std::vector<ConvergenceRecord> records_of(std::span<const ConvergenceRecord> all, const std::string& method) {
  std::vector<ConvergenceRecord> out;
  for (const auto& r : all)
    if (r.method == method) out.push_back(r);
  return out;
}

std::vector<std::size_t> pow2_ladder(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

std::vector<double> halving_ladder(double start, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::ldexp(start, -static_cast<int>(i)));
  return out;
}

MarginalGrid nig_marginal_grid(const NIGParams& p, double t, std::size_t qubits, double tau) {
  if (qubits == 0 || qubits > 20) throw DomainError("nig_marginal_grid: qubits must lie in [1, 20]");
  MarginalGrid g;
  g.interval = nig_quantile_range(p, t, tau, tau);
  const std::size_t n = std::size_t{1} << qubits;
  const double dx = g.interval.width() / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    g.nodes.push_back(g.interval.a + (static_cast<double>(j) + 0.5) * dx);
    g.masses.push_back(nig_pdf(g.nodes.back(), p, t) * dx);
  }
  return g;
}

void CoeffStudyConfig::validate() const {
  require_common(repetitions, rho, grid_tail);
  require_ladders(samples, epsilons);
  require_admissible(params);
  if (terms < 2) throw ValidationError("coefficient study: needs at least 2 terms");
  if (k_low == 0 || k_low >= terms || k_high >= terms)
    throw ValidationError("coefficient study: ratio indices must lie in [1, terms)");
  if (ratio_samples == 0 || !(ratio_epsilon > 0.0 && ratio_epsilon < 1.0))
    throw ValidationError("coefficient study: invalid ratio cost level");
}

CoeffStudyResult study_coeffs(const CoeffStudyConfig& cfg, Exec exec) {
  cfg.validate();
  CoeffStudyResult res;
  res.grid = nig_marginal_grid(cfg.params, cfg.expiry, cfg.qubits, cfg.grid_tail);
  const MarginalGrid& g = res.grid;
  res.truth = coeffs_from_masses(g.nodes, g.masses, g.interval, cfg.terms).coeffs;
  const Categorical cat(g.masses);
  const std::size_t reps = cfg.repetitions;
  const std::size_t K = cfg.terms;

  // CMC: one sample set per repetition serves all coefficients.
  auto cmc_run = [&](std::size_t samples, std::uint64_t stream) {
    Rng rng = make_stream(cfg.seed, stream);
    return cmc_coefficients(g, cat, samples, K, rng);
  };
  std::vector<std::vector<double>> cmc_est(cfg.samples.size() * reps);
  for_tasks(cmc_est.size(), [&](std::size_t i) { cmc_est[i] = cmc_run(cfg.samples[i / reps], i); }, exec);

  struct QRun {
    std::vector<double> est;
    std::vector<std::size_t> queries;
    std::vector<std::uint64_t> seeds;
  };
  auto qamc_run = [&](double eps, std::uint64_t stream) {
    QRun q;
    q.est.assign(K, 0.0);
    q.est[0] = res.truth[0];
    q.queries.assign(K, 0);
    q.seeds.assign(K, 0);
    for (std::size_t k = 1; k < K; ++k) {
      AEConfig ae;
      ae.epsilon = eps;
      ae.rho = cfg.rho;
      ae.seed = derive_seed(cfg.seed, (stream << 8) + k + (std::uint64_t{1} << 40));
      const auto c = qamc_coefficient(g.nodes, g.masses, k, g.interval, ae);
      q.est[k] = c.value;
      q.queries[k] = c.oracle_queries;
      q.seeds[k] = ae.seed;
    }
    return q;
  };
  std::vector<QRun> q_est(cfg.epsilons.size() * reps);
  for_tasks(q_est.size(), [&](std::size_t i) { q_est[i] = qamc_run(cfg.epsilons[i / reps], i); }, exec);

  for (std::size_t l = 0; l < cfg.samples.size(); ++l) {
    std::vector<double> errs;
    for (std::size_t r = 0; r < reps; ++r) errs.push_back(mean_error_k1(cmc_est[l * reps + r], res.truth));
    res.records.push_back(summarize("cmc", static_cast<double>(cfg.samples[l]), static_cast<double>(cfg.samples[l]), errs));
  }
  for (std::size_t l = 0; l < cfg.epsilons.size(); ++l) {
    std::vector<double> errs;
    double cost = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const QRun& q = q_est[l * reps + r];
      errs.push_back(mean_error_k1(q.est, res.truth));
      cost += static_cast<double>(std::accumulate(q.queries.begin(), q.queries.end(), std::size_t{0})) /
              static_cast<double>(K - 1);
      for (std::size_t k = 1; k < K; ++k)
        res.run_log.push_back({"qamc-coeff-" + std::to_string(k), res.truth[k], cfg.epsilons[l], cfg.rho, q.est[k],
                               q.queries[k], q.seeds[k]});
    }
    res.records.push_back(summarize("qamc", cost / static_cast<double>(reps), cfg.epsilons[l], errs));
  }
  res.cmc_fit = fit_loglog(records_of(res.records, "cmc"));
  res.qamc_fit = fit_loglog(records_of(res.records, "qamc"));

  // Per-coefficient errors at one fixed cost level of each method.
  const std::uint64_t ratio_stream = std::uint64_t{1} << 32;
  std::vector<std::vector<double>> cmc_fixed(reps);
  std::vector<QRun> q_fixed(reps);
  for_tasks(reps, [&](std::size_t r) { cmc_fixed[r] = cmc_run(cfg.ratio_samples, ratio_stream + r); }, exec);
  for_tasks(reps, [&](std::size_t r) { q_fixed[r] = qamc_run(cfg.ratio_epsilon, ratio_stream + r); }, exec);
  res.cmc_per_k.assign(K, 0.0);
  res.qamc_per_k.assign(K, 0.0);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t k = 0; k < K; ++k) {
      res.cmc_per_k[k] += std::abs(cmc_fixed[r][k] - res.truth[k]) / static_cast<double>(reps);
      res.qamc_per_k[k] += std::abs(q_fixed[r].est[k] - res.truth[k]) / static_cast<double>(reps);
    }
  res.cmc_ratio = res.cmc_per_k[cfg.k_high] / res.cmc_per_k[cfg.k_low];
  res.qamc_ratio = res.qamc_per_k[cfg.k_high] / res.qamc_per_k[cfg.k_low];
  return res;
}

void DensityStudyConfig::validate() const {
  require_common(repetitions, rho, grid_tail);
  require_admissible(params);
  if (terms.empty()) throw ValidationError("density study: term list is empty");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i] < 2) throw ValidationError("density study: needs at least 2 terms");
    if (i && terms[i] <= terms[i - 1]) throw ValidationError("density study: term list must be increasing");
  }
  if (cost < 100) throw ValidationError("density study: cost must be >= 100 (one round of shots)");
  if (points < 2) throw ValidationError("density study: needs at least 2 evaluation points");
}

DensityStudyResult study_density(const DensityStudyConfig& cfg, Exec exec) {
  cfg.validate();
  DensityStudyResult res;
  res.grid = nig_marginal_grid(cfg.params, cfg.expiry, cfg.qubits, cfg.grid_tail);
  const MarginalGrid& g = res.grid;
  const Categorical cat(g.masses);
  const std::size_t reps = cfg.repetitions;
  const double t = cfg.expiry;

  for (std::size_t ti = 0; ti < cfg.terms.size(); ++ti) {
    const std::size_t K = cfg.terms[ti];
    const CosineSeries exact = coeffs_from_masses(g.nodes, g.masses, g.interval, K);
    {
      const auto e = nig_series_error(exact, cfg.params, t, cfg.points);
      DensityRow row;
      row.terms = K;
      row.method = "grid";
      row.pdf_sup_mean = row.pdf_sup_median = row.pdf_sup_lo = row.pdf_sup_hi = e.pdf_sup;
      row.cdf_sup_mean = row.cdf_sup_median = row.cdf_sup_lo = row.cdf_sup_hi = e.cdf_sup;
      res.rows.push_back(row);
    }
    std::vector<SeriesError> cmc_err(reps);
    std::vector<SeriesError> q_err(reps);
    std::vector<double> q_cost(reps, 0.0);
    for_tasks(
        2 * reps,
        [&](std::size_t i) {
          const std::size_t r = i % reps;
          const std::uint64_t stream = (ti << 20) + r;
          CosineSeries s{g.interval, {}};
          if (i < reps) {
            Rng rng = make_stream(cfg.seed, stream);
            s.coeffs = cmc_coefficients(g, cat, cfg.cost, K, rng);
            cmc_err[r] = nig_series_error(s, cfg.params, t, cfg.points);
          } else {
            s.coeffs.assign(K, 0.0);
            s.coeffs[0] = exact.coeffs[0];
            double queries = 0.0;
            for (std::size_t k = 1; k < K; ++k) {
              AEConfig ae;
              ae.epsilon = 1e-4;
              ae.rho = cfg.rho;
              ae.max_queries = cfg.cost;
              ae.seed = derive_seed(cfg.seed, (stream << 8) + k + (std::uint64_t{1} << 40));
              const auto c = qamc_coefficient(g.nodes, g.masses, k, g.interval, ae);
              s.coeffs[k] = c.value;
              queries += static_cast<double>(c.oracle_queries);
            }
            q_cost[r] = queries / static_cast<double>(K - 1);
            q_err[r] = nig_series_error(s, cfg.params, t, cfg.points);
          }
        },
        exec);
    auto row_of = [&](const std::string& method, const std::vector<SeriesError>& errs, double cost) {
      std::vector<double> pdf;
      std::vector<double> cdf;
      for (const auto& e : errs) {
        pdf.push_back(e.pdf_sup);
        cdf.push_back(e.cdf_sup);
      }
      DensityRow row;
      row.terms = K;
      row.method = method;
      row.pdf_sup_mean = mean(pdf);
      row.pdf_sup_median = percentile(pdf, 0.5);
      row.pdf_sup_lo = percentile(pdf, 0.05);
      row.pdf_sup_hi = percentile(pdf, 0.95);
      row.cdf_sup_mean = mean(cdf);
      row.cdf_sup_median = percentile(cdf, 0.5);
      row.cdf_sup_lo = percentile(cdf, 0.05);
      row.cdf_sup_hi = percentile(cdf, 0.95);
      row.mean_cost = cost;
      return row;
    };
    res.rows.push_back(row_of("cmc", cmc_err, static_cast<double>(cfg.cost)));
    res.rows.push_back(row_of("qamc", q_err, mean(q_cost)));
  }
  return res;
}

void PriceStudyConfig::validate() const {
  require_common(repetitions, rho, grid_tail);
  require_ladders(samples, epsilons);
  if (qubits == 0) throw ValidationError("price study: qubits per dimension must be >= 1");
  if (!(target_error > 0.0)) throw ValidationError("price study: target error must be positive");
}

PriceStudyResult study_price(const MultiAssetModel& model, const Payoff& payoff, const PriceStudyConfig& cfg,
                             Exec exec) {
  cfg.validate();
  const PricingGrid grid = PricingGrid::on_quantiles(model, cfg.qubits, cfg.grid_tail);
  const GridLaw law = discretize(model, grid, payoff, exec, cfg.cell_mass);
  PriceStudyResult res;
  res.name = cfg.name;
  res.reference = riemann_reference(law);
  res.joint_mass = law.joint_total();
  res.c_max = law.c_max;
  res.payoff_max = law.payoff_max;
  const std::size_t reps = cfg.repetitions;

  std::vector<double> cmc_err(cfg.samples.size() * reps);
  for_tasks(
      cmc_err.size(),
      [&](std::size_t i) {
        Rng rng = make_stream(cfg.seed, i);
        cmc_err[i] = std::abs(cmc_price(law, Formulation::joint, cfg.samples[i / reps], rng).value - res.reference);
      },
      exec);
  for (std::size_t l = 0; l < cfg.samples.size(); ++l) {
    const double L = static_cast<double>(cfg.samples[l]);
    res.records.push_back(summarize("cmc", L, L, std::span<const double>(cmc_err).subspan(l * reps, reps)));
  }

  for (const Formulation f : {Formulation::joint, Formulation::independent}) {
    const std::string method = f == Formulation::joint ? "qamc-joint" : "qamc-independent";
    const std::uint64_t base = f == Formulation::joint ? std::uint64_t{1} << 40 : std::uint64_t{2} << 40;
    std::vector<PriceEstimate> est(cfg.epsilons.size() * reps);
    std::vector<std::uint64_t> seeds(est.size());
    for_tasks(
        est.size(),
        [&](std::size_t i) {
          AEConfig ae;
          ae.epsilon = cfg.epsilons[i / reps];
          ae.rho = cfg.rho;
          ae.seed = seeds[i] = derive_seed(cfg.seed, base + i);
          est[i] = qamc_price(law, f, ae);
        },
        exec);
    for (std::size_t l = 0; l < cfg.epsilons.size(); ++l) {
      std::vector<double> errs;
      double cost = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& e = est[l * reps + r];
        errs.push_back(std::abs(e.value - res.reference));
        cost += static_cast<double>(e.samples_or_queries);
        res.run_log.push_back({cfg.name + "-" + method, res.reference, cfg.epsilons[l], cfg.rho, e.value,
                               e.samples_or_queries, seeds[l * reps + r]});
      }
      res.records.push_back(summarize(method, cost / static_cast<double>(reps), cfg.epsilons[l], errs));
    }
  }
  res.cmc_fit = fit_loglog(records_of(res.records, "cmc"));
  res.joint_fit = fit_loglog(records_of(res.records, "qamc-joint"));
  res.independent_fit = fit_loglog(records_of(res.records, "qamc-independent"));
  res.cmc_cost = cost_at_error(res.cmc_fit, cfg.target_error);
  res.joint_cost = cost_at_error(res.joint_fit, cfg.target_error);
  res.independent_cost = cost_at_error(res.independent_fit, cfg.target_error);
  return res;
}

}  // namespace cqamc
