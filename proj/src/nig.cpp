#include "cqamc/nig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cqamc/errors.hpp"
#include "cqamc/numerics.hpp"

namespace cqamc {
namespace {

constexpr std::size_t kMaxPanels = 20000;
constexpr double kMaxTruncationL = 400.0;

// Integral over [lo, hi] of g(x) f(x) using panels no wider than the density scale.
template <class G>
double integrate_against_density(const NIGParams& p, double t, double lo, double hi, G&& g) {
  if (!(lo < hi)) return 0.0;
  const std::size_t panels = nig_panel_count(p, t, Interval{lo, hi});
  return integrate_composite([&](double x) { return g(x) * nig_pdf(x, p, t); }, lo, hi, panel_rule(), panels);
}

// Mass of e^x f(x) above b, relative to E[e^X].
double weighted_right_tail(const NIGParams& p, double t, double b) {
  const Cumulants c = nig_cumulants(p, t);
  const double rate = p.alpha - p.beta - 1.0;
  const double start = std::max(b, c.c1 + 10.0 * c.spread());
  const double hi = start + 45.0 / rate;
  const double mgf = std::exp(-martingale_adjustment(p) * t);  // E[e^{X(t)}]
  // Scale by e^{-start} to keep the integrand bounded.
  const double tail = integrate_against_density(p, t, b, hi, [&](double x) { return std::exp(x - start); });
  return tail * std::exp(start) / mgf;
}

}  // namespace

double NIGParams::gamma() const { return std::sqrt(alpha * alpha - beta * beta); }

bool is_admissible(const NIGParams& p, double margin) {
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.delta) || !std::isfinite(p.mu))
    return false;
  const double a2 = p.alpha * p.alpha;
  return p.alpha > 0.0 && p.delta > 0.0 && a2 - p.beta * p.beta > margin &&
         a2 - (p.beta + 1.0) * (p.beta + 1.0) > margin;
}

void require_admissible(const NIGParams& p) {
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.delta) || !std::isfinite(p.mu))
    throw DomainError("NIG parameters must be finite");
  if (!(p.alpha > 0.0)) throw DomainError("NIG: alpha must be > 0");
  if (!(p.delta > 0.0)) throw DomainError("NIG: delta must be > 0");
  if (!(p.beta * p.beta < p.alpha * p.alpha)) throw DomainError("NIG: require beta^2 < alpha^2");
  if (!((p.beta + 1.0) * (p.beta + 1.0) < p.alpha * p.alpha))
    throw DomainError("NIG: require (beta+1)^2 < alpha^2");
}

double nig_pdf(double x, const NIGParams& p, double t) {
  if (!(t > 0.0)) throw DomainError("nig_pdf: t must be > 0");
  if (!(p.alpha > 0.0) || !(p.delta > 0.0) || !(p.beta * p.beta < p.alpha * p.alpha))
    throw DomainError("nig_pdf: inadmissible parameters");
  const double d = p.delta * t;
  const double y = x - p.mu * t;
  const double r = std::hypot(d, y);
  const double z = p.alpha * r;
  // Exponents combined in log space: K1(z) = K1e(z) e^{-z}.
  const double log_f = std::log(p.alpha * d / std::numbers::pi) + d * p.gamma() + p.beta * y - z +
                       std::log(bessel_k1e(z)) - std::log(r);
  return std::exp(log_f);
}

std::complex<double> nig_char_exponent(double u, const NIGParams& p) {
  const std::complex<double> bu(p.beta, u);
  const std::complex<double> root = std::sqrt(p.alpha * p.alpha - bu * bu);
  return std::complex<double>(0.0, p.mu * u) - p.delta * (root - p.gamma());
}

double martingale_adjustment(const NIGParams& p) {
  if (!((p.beta + 1.0) * (p.beta + 1.0) < p.alpha * p.alpha))
    throw DomainError("martingale_adjustment: require (beta+1)^2 < alpha^2");
  const double a2 = p.alpha * p.alpha;
  return -p.mu + p.delta * (std::sqrt(a2 - (p.beta + 1.0) * (p.beta + 1.0)) - std::sqrt(a2 - p.beta * p.beta));
}

double Cumulants::spread() const { return std::sqrt(c2 + std::sqrt(c4)); }

Cumulants nig_cumulants(const NIGParams& p, double t) {
  const double a2 = p.alpha * p.alpha;
  const double b2 = p.beta * p.beta;
  const double g2 = a2 - b2;
  const double g = std::sqrt(g2);
  const double d = p.delta * t;
  Cumulants c;
  c.c1 = p.mu * t + d * p.beta / g;
  c.c2 = d * a2 / (g2 * g);
  c.c4 = 3.0 * d * a2 * (a2 + 4.0 * b2) / (g2 * g2 * g2 * g);
  return c;
}

Interval cumulant_interval(const NIGParams& p, double t, double L) {
  const Cumulants c = nig_cumulants(p, t);
  const double h = L * c.spread();
  return {c.c1 - h, c.c1 + h};
}

double nig_left_tail(const NIGParams& p, double t, double a) {
  const Cumulants c = nig_cumulants(p, t);
  const double rate = p.alpha + p.beta;
  const double start = std::min(a, c.c1 - 10.0 * c.spread());
  return integrate_against_density(p, t, start - 45.0 / rate, a, [](double) { return 1.0; });
}

double nig_right_tail(const NIGParams& p, double t, double b) {
  const Cumulants c = nig_cumulants(p, t);
  const double rate = p.alpha - p.beta;
  const double start = std::max(b, c.c1 + 10.0 * c.spread());
  return integrate_against_density(p, t, b, start + 45.0 / rate, [](double) { return 1.0; });
}

Interval nig_support(const NIGParams& p, double t, double tol) {
  require_admissible(p);
  const Cumulants c = nig_cumulants(p, t);
  const double s = c.spread();
  double left_L = 10.0;
  while (left_L < kMaxTruncationL && nig_left_tail(p, t, c.c1 - left_L * s) > tol) left_L += 2.0;
  double right_L = 10.0;
  while (right_L < kMaxTruncationL && weighted_right_tail(p, t, c.c1 + right_L * s) > tol) right_L += 2.0;
  return {c.c1 - left_L * s, c.c1 + right_L * s};
}

std::size_t nig_panel_count(const NIGParams& p, double t, const Interval& iv) {
  const double scale = std::min(p.delta * t, std::sqrt(nig_cumulants(p, t).c2));
  const double n = std::ceil(iv.width() / scale);
  return static_cast<std::size_t>(std::clamp(n, 1.0, static_cast<double>(kMaxPanels)));
}

double ExpNIGModel::drift() const {
  return (slice.rate - slice.dividend_yield + martingale_adjustment(params)) * slice.expiry;
}

NigPricer::NigPricer(const ExpNIGModel& model, double tail_tol) : model_(model) {
  require_admissible(model_.params);
  if (!(model_.slice.spot > 0.0) || !(model_.slice.expiry > 0.0))
    throw DomainError("NigPricer: spot and expiry must be > 0");
  const double t = model_.slice.expiry;
  support_ = nig_support(model_.params, t, tail_tol);
  const std::size_t panels = nig_panel_count(model_.params, t, support_);
  panel_width_ = support_.width() / static_cast<double>(panels);
  log_spot_drift_ = std::log(model_.slice.spot) + model_.drift();

  const QuadratureRule& rule = panel_rule();
  nodes_.reserve(panels * rule.size());
  weighted_density_.reserve(panels * rule.size());
  panel_mass_.assign(panels, 0.0);
  panel_spot_mass_.assign(panels, 0.0);
  const double half = 0.5 * panel_width_;
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = support_.a + (static_cast<double>(k) + 0.5) * panel_width_;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = mid + half * rule.nodes[i];
      const double wf = half * rule.weights[i] * nig_pdf(x, model_.params, t);
      nodes_.push_back(x);
      weighted_density_.push_back(wf);
      panel_mass_[k] += wf;
      panel_spot_mass_[k] += wf * std::exp(log_spot_drift_ + x);
    }
  }
}

double NigPricer::partial(double lo, double hi, double strike, OptionKind kind) const {
  if (!(lo < hi)) return 0.0;
  const double t = model_.slice.expiry;
  return integrate(
      [&](double x) {
        const double s = std::exp(log_spot_drift_ + x);
        const double payoff = kind == OptionKind::call ? std::max(s - strike, 0.0) : std::max(strike - s, 0.0);
        return payoff * nig_pdf(x, model_.params, t);
      },
      lo, hi, panel_rule());
}

double NigPricer::price(double strike, OptionKind kind) const {
  if (!(strike > 0.0) || !std::isfinite(strike)) throw DomainError("price: strike must be > 0");
  const double kink = std::log(strike) - log_spot_drift_;
  const std::size_t panels = panel_mass_.size();
  double value = 0.0;
  if (kink <= support_.a) {
    if (kind == OptionKind::call)
      for (std::size_t k = 0; k < panels; ++k) value += panel_spot_mass_[k] - strike * panel_mass_[k];
  } else if (kink >= support_.b) {
    if (kind == OptionKind::put)
      for (std::size_t k = 0; k < panels; ++k) value += strike * panel_mass_[k] - panel_spot_mass_[k];
  } else {
    const auto pk = std::min<std::size_t>(static_cast<std::size_t>((kink - support_.a) / panel_width_), panels - 1);
    const double panel_lo = support_.a + static_cast<double>(pk) * panel_width_;
    const double panel_hi = pk + 1 == panels ? support_.b : panel_lo + panel_width_;
    if (kind == OptionKind::call) {
      value = partial(kink, panel_hi, strike, kind);
      for (std::size_t k = pk + 1; k < panels; ++k) value += panel_spot_mass_[k] - strike * panel_mass_[k];
    } else {
      value = partial(panel_lo, kink, strike, kind);
      for (std::size_t k = 0; k < pk; ++k) value += strike * panel_mass_[k] - panel_spot_mass_[k];
    }
  }
  return model_.slice.discount_factor * std::max(value, 0.0);
}

double NigPricer::expected_terminal() const {
  double acc = 0.0;
  for (double m : panel_spot_mass_) acc += m;
  return acc;
}

double NigPricer::total_mass() const {
  double acc = 0.0;
  for (double m : panel_mass_) acc += m;
  return acc;
}

double price_european(const ExpNIGModel& model, double strike, OptionKind kind) {
  return NigPricer(model).price(strike, kind);
}

double price_european_cos(const ExpNIGModel& model, double strike, OptionKind kind, std::size_t terms) {
  require_admissible(model.params);
  if (terms < 16) throw DomainError("price_european_cos: need at least 16 terms");
  if (!(strike > 0.0)) throw DomainError("price_european_cos: strike must be > 0");
  const double t = model.slice.expiry;
  // Truncation range for y = log(S(T)/K).
  const Interval xs = nig_support(model.params, t, 1e-14);
  const double shift = std::log(model.slice.spot / strike) + model.drift();
  const double a = xs.a + shift;
  const double b = xs.b + shift;
  const double width = b - a;

  // Payoff integrated over the part of [a, b] where it is positive.
  double c = 0.0;
  double d = 0.0;
  double sign = 1.0;
  if (kind == OptionKind::call) {
    c = std::max(a, 0.0);
    d = b;
  } else {
    c = a;
    d = std::min(b, 0.0);
    sign = -1.0;
  }
  if (!(c < d)) return 0.0;

  double acc = 0.0;
  for (std::size_t k = 0; k < terms; ++k) {
    const double u = static_cast<double>(k) * std::numbers::pi / width;
    // chi: integral of e^y cos(u(y-a)); psi: integral of cos(u(y-a)) over [c, d].
    const double ec = std::exp(c);
    const double ed = std::exp(d);
    const double cos_c = std::cos(u * (c - a));
    const double cos_d = std::cos(u * (d - a));
    const double sin_c = std::sin(u * (c - a));
    const double sin_d = std::sin(u * (d - a));
    const double chi = (cos_d * ed - cos_c * ec + u * (sin_d * ed - sin_c * ec)) / (1.0 + u * u);
    const double psi = k == 0 ? d - c : (sin_d - sin_c) / u;
    const double vk = 2.0 / width * strike * sign * (chi - psi);

    const std::complex<double> phi =
        std::exp(std::complex<double>(0.0, u * shift) + t * nig_char_exponent(u, model.params));
    const double re = (phi * std::exp(std::complex<double>(0.0, -u * a))).real();
    acc += (k == 0 ? 0.5 : 1.0) * re * vk;
  }
  return model.slice.discount_factor * acc;
}

double standard_normal(Rng& rng) { return std_normal_quantile(uniform_open(rng)); }

std::vector<double> sample_nig(const NIGParams& p, double t, Rng& rng, std::size_t count) {
  require_admissible(p);
  if (!(t > 0.0)) throw DomainError("sample_nig: t must be > 0");
  const double d = p.delta * t;
  const double mean = d / p.gamma();  // inverse-Gaussian mean
  const double shape = d * d;         // inverse-Gaussian shape
  std::vector<double> out(count);
  for (auto& x : out) {
    const double n1 = standard_normal(rng);
    const double y = mean * n1 * n1 / (2.0 * shape);
    // Smaller root of the MSH quadratic in a cancellation-free form.
    const double root = mean / (1.0 + y + std::sqrt(y * y + 2.0 * y));
    const double z = uniform_open(rng) <= mean / (mean + root) ? root : mean * mean / root;
    x = p.mu * t + p.beta * z + std::sqrt(z) * standard_normal(rng);
  }
  return out;
}

}  // namespace cqamc
