#include "cqamc/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cqamc/black_scholes.hpp"
#include "cqamc/market_data.hpp"

namespace cqamc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec3 = Eigen::Vector3d;

Vec3 to_vec(const NIGParams& p) { return {p.alpha, p.beta, p.delta}; }
NIGParams from_vec(const Vec3& v) { return {v[0], v[1], v[2], 0.0}; }

struct Problem {
  const MarketSlice& slice;
  const CalibrationConfig& config;
  std::vector<OptionQuote> quotes;
  std::vector<double> sqrt_w;

  Problem(const MarketSlice& s, const CalibrationConfig& c) : slice(s), config(c), quotes(usable_quotes(s.quotes)) {
    if (quotes.empty()) throw ValidationError("calibration: no usable quotes");
    if (!(c.lambda >= 0.0)) throw DomainError("calibration: lambda must be >= 0");
    const auto w = quote_weights(quotes, c);
    sqrt_w.reserve(w.size());
    for (double x : w) sqrt_w.push_back(std::sqrt(x));
  }

  std::size_t size() const { return quotes.size() + 3; }

  bool feasible(const Vec3& x) const {
    const auto& b = config.bounds;
    return x[0] >= b.alpha_lo && x[0] <= b.alpha_hi && x[1] >= b.beta_lo && x[1] <= b.beta_hi &&
           x[2] >= b.delta_lo && x[2] <= b.delta_hi && is_admissible(from_vec(x), config.admissibility_margin);
  }

  // Stacked residual sqrt(w)(V - mid) and sqrt(lambda)(theta - theta0); empty on failure.
  Eigen::VectorXd residuals(const Vec3& x) const {
    Eigen::VectorXd r(size());
    try {
      const NigPricer pricer(ExpNIGModel{from_vec(x), slice});
      for (std::size_t m = 0; m < quotes.size(); ++m)
        r[static_cast<Eigen::Index>(m)] = sqrt_w[m] * (pricer.price(quotes[m].strike, quotes[m].kind) - quotes[m].mid());
    } catch (const std::exception&) {
      return {};
    }
    const double sl = std::sqrt(config.lambda);
    r.tail<3>() = sl * (x - to_vec(config.prior));
    if (!r.allFinite()) return {};
    return r;
  }
};

double cost(const Eigen::VectorXd& r) { return r.size() ? r.squaredNorm() : kInf; }

}  // namespace

std::vector<double> quote_weights(const std::vector<OptionQuote>& quotes, const CalibrationConfig& config) {
  std::vector<double> w(quotes.size(), 1.0);
  if (config.weights == WeightRule::inverse_spread) {
    if (!(config.weight_floor > 0.0)) throw DomainError("weight floor must be > 0");
    for (std::size_t m = 0; m < quotes.size(); ++m) {
      const double s = std::max(quotes[m].spread(), config.weight_floor);
      w[m] = 1.0 / (s * s);
    }
  }
  return w;
}

std::vector<double> model_prices(const NIGParams& theta, const MarketSlice& slice) {
  const NigPricer pricer(ExpNIGModel{theta, slice});
  std::vector<double> out;
  for (const auto& q : slice.quotes)
    if (q.bid > 0.0) out.push_back(pricer.price(q.strike, q.kind));
  return out;
}

double objective(const NIGParams& theta, const MarketSlice& slice, const CalibrationConfig& config) {
  require_admissible(theta);
  const auto quotes = usable_quotes(slice.quotes);
  if (quotes.empty()) throw ValidationError("objective: no usable quotes");
  const auto w = quote_weights(quotes, config);
  const NigPricer pricer(ExpNIGModel{theta, slice});
  double fit = 0.0;
  for (std::size_t m = 0; m < quotes.size(); ++m) {
    const double r = pricer.price(quotes[m].strike, quotes[m].kind) - quotes[m].mid();
    fit += w[m] * r * r;
  }
  const double da = theta.alpha - config.prior.alpha;
  const double db = theta.beta - config.prior.beta;
  const double dd = theta.delta - config.prior.delta;
  return fit + config.lambda * (da * da + db * db + dd * dd);
}

NIGParams project_admissible(const NIGParams& p, const ParamBox& box, double margin) {
  NIGParams q = p;
  q.mu = 0.0;
  q.alpha = std::clamp(q.alpha, box.alpha_lo, box.alpha_hi);
  q.delta = std::clamp(q.delta, box.delta_lo, box.delta_hi);
  // -s < beta < s - 1 with s = sqrt(alpha^2 - margin); tighten slightly to stay strict.
  const double s = std::sqrt(std::max(q.alpha * q.alpha - 2.0 * margin, 0.0));
  const double pad = 1e-9 * std::max(1.0, s);
  const double lo = std::max(box.beta_lo, -s + pad);
  const double hi = std::min(box.beta_hi, s - 1.0 - pad);
  if (lo > hi) throw DomainError("project_admissible: empty beta range; raise alpha_lo");
  q.beta = std::clamp(q.beta, lo, hi);
  return q;
}

NIGParams grid_init(const MarketSlice& slice, const CalibrationConfig& config) {
  std::vector<NIGParams> points;
  for (double a : config.grid.alpha)
    for (double b : config.grid.beta)
      for (double d : config.grid.delta) {
        const NIGParams p{a, b, d, 0.0};
        if (is_admissible(p, config.admissibility_margin)) points.push_back(p);
      }
  if (points.empty()) throw ValidationError("grid_init: lattice empty after admissibility filtering");

  const Problem problem(slice, config);
  std::vector<double> values(points.size(), kInf);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = cost(problem.residuals(to_vec(points[i])));

  const auto best = std::min_element(values.begin(), values.end());
  if (!std::isfinite(*best)) throw CalibrationFailure("grid_init: no lattice point has a finite objective", points[0]);
  return points[static_cast<std::size_t>(best - values.begin())];
}

CalibrationResult calibrate(const MarketSlice& slice, const CalibrationConfig& config) {
  const Problem problem(slice, config);
  CalibrationResult res;
  res.n_quotes = problem.quotes.size();
  for (double a : config.grid.alpha)
    for (double b : config.grid.beta)
      for (double d : config.grid.delta)
        if (is_admissible({a, b, d, 0.0}, config.admissibility_margin)) ++res.lattice_points;

  res.start = project_admissible(grid_init(slice, config), config.bounds, config.admissibility_margin);
  Vec3 x = to_vec(res.start);
  Eigen::VectorXd r = problem.residuals(x);
  double f = cost(r);
  if (!std::isfinite(f)) throw CalibrationFailure("calibrate: start point not evaluable", res.start);
  res.start_objective = f;
  res.trace.push_back(res.start);

  const auto n = static_cast<Eigen::Index>(problem.size());
  double mu = 1e-3;
  std::size_t iter = 0;
  for (; iter < config.tol.max_iterations && f > 0.0; ++iter) {
    // Central differences, one-sided where a probe leaves the feasible set.
    std::array<Eigen::VectorXd, 6> probes;
    std::array<Vec3, 6> points;
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(x[j]));
      points[2 * j] = x;
      points[2 * j][j] += h;
      points[2 * j + 1] = x;
      points[2 * j + 1][j] -= h;
    }
#pragma omp parallel for schedule(static)
    for (int k = 0; k < 6; ++k)
      if (problem.feasible(points[k])) probes[k] = problem.residuals(points[k]);

    Eigen::MatrixXd jac(n, 3);
    for (int j = 0; j < 3; ++j) {
      const auto& up = probes[2 * j];
      const auto& dn = probes[2 * j + 1];
      const double xu = points[2 * j][j];
      const double xd = points[2 * j + 1][j];
      if (up.size() && dn.size())
        jac.col(j) = (up - dn) / (xu - xd);
      else if (up.size())
        jac.col(j) = (up - r) / (xu - x[j]);
      else if (dn.size())
        jac.col(j) = (r - dn) / (x[j] - xd);
      else
        jac.col(j).setZero();
    }

    const Eigen::Matrix3d a = jac.transpose() * jac;
    const Vec3 g = jac.transpose() * r;
    if (g.norm() <= config.tol.gtol * (1.0 + f)) break;
    Vec3 diag = a.diagonal();
    const double dmax = std::max(diag.maxCoeff(), 1e-300);
    for (int j = 0; j < 3; ++j) diag[j] = std::max(diag[j], 1e-12 * dmax);

    bool accepted = false;
    bool converged = false;
    while (mu < 1e16) {
      Eigen::Matrix3d lhs = a;
      lhs.diagonal() += mu * diag;
      const Vec3 step = lhs.ldlt().solve(-g);
      const Vec3 trial = to_vec(project_admissible(from_vec(x + step), config.bounds, config.admissibility_margin));
      const Eigen::VectorXd rt = problem.residuals(trial);
      const double ft = cost(rt);
      if (ft < f) {
        const double dx = (trial - x).norm();
        converged = (f - ft) <= config.tol.ftol * f || dx <= config.tol.xtol * (x.norm() + config.tol.xtol);
        x = trial;
        r = rt;
        f = ft;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        res.trace.push_back(from_vec(x));
        break;
      }
      mu *= 4.0;
    }
    if (!accepted || converged) {
      ++iter;
      break;
    }
  }

  res.theta = from_vec(x);
  res.objective = f;
  res.iterations = iter;
  const auto prices = model_prices(res.theta, slice);
  double sq = 0.0;
  for (std::size_t m = 0; m < prices.size(); ++m) {
    const double e = prices[m] - problem.quotes[m].mid();
    res.residuals.push_back(e);
    sq += e * e;
    res.max_err_bp = std::max(res.max_err_bp, std::abs(e) / slice.spot * 1e4);
  }
  res.rmse_bp = std::sqrt(sq / static_cast<double>(prices.size())) / slice.spot * 1e4;
  return res;
}

NIGParams bs_prior(const MarketSlice& slice, double* sigma_atm) {
  const auto quotes = usable_quotes(slice.quotes);
  if (quotes.empty()) throw ValidationError("bs_prior: no usable ATM quote");
  const double fw = slice.forward > 0.0 ? slice.forward : slice.spot;
  // Nearest strike to the forward; OTM side preferred on ties of distance.
  const OptionQuote* atm = nullptr;
  for (const auto& q : quotes) {
    if (!atm) {
      atm = &q;
      continue;
    }
    const double dq = std::abs(q.strike - fw);
    const double da = std::abs(atm->strike - fw);
    const bool q_otm = (q.kind == OptionKind::call) == (q.strike >= fw);
    if (dq < da || (dq == da && q_otm)) atm = &q;
  }
  const BSInputs in{slice.spot, atm->strike, slice.expiry, slice.rate, slice.dividend_yield, 0.0};
  const double sigma = implied_vol(atm->mid(), in, atm->kind);
  if (sigma_atm) *sigma_atm = sigma;
  constexpr double alpha0 = 10.0;
  return {alpha0, 0.0, sigma * sigma * alpha0, 0.0};
}

}  // namespace cqamc
