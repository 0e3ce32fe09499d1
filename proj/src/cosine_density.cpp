#include "cqamc/cosine_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cqamc/errors.hpp"
#include "cqamc/kernels.hpp"

namespace cqamc {
namespace {

void require_interval(const Interval& iv) {
  if (!(iv.a < iv.b) || !std::isfinite(iv.a) || !std::isfinite(iv.b))
    throw DomainError("cosine series: interval must satisfy a < b");
}

// Flattened composite rule on iv: nodes and weights.
void composite_nodes(const Interval& iv, const QuadratureRule& rule, std::size_t panels, std::vector<double>& x,
                     std::vector<double>& w) {
  panels = std::max<std::size_t>(panels, 1);
  const double width = iv.width() / static_cast<double>(panels);
  x.clear();
  w.clear();
  x.reserve(panels * rule.size());
  w.reserve(panels * rule.size());
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = iv.a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      x.push_back(mid + 0.5 * width * rule.nodes[i]);
      w.push_back(0.5 * width * rule.weights[i]);
    }
  }
}

CosineSeries project(const Interval& iv, std::size_t terms, std::span<const double> x, std::span<const double> w) {
  if (terms == 0) throw DomainError("cosine series: terms must be >= 1");
  return {iv, cosine_projection(x, w, iv, terms)};
}

}  // namespace

double basis_gamma(std::size_t k, double x, const Interval& iv) {
  require_interval(iv);
  if (!(x >= iv.a && x <= iv.b)) throw DomainError("basis_gamma: x outside [a, b]");
  const double len = iv.width();
  if (k == 0) return 1.0 / std::sqrt(len);
  return std::sqrt(2.0 / len) * std::cos(static_cast<double>(k) * std::numbers::pi * (x - iv.a) / len);
}

double basis_gamma_plus(std::size_t k, double x, const Interval& iv) {
  return std::clamp(0.5 + 0.5 * std::sqrt(iv.width() / 2.0) * basis_gamma(k, x, iv), 0.0, 1.0);
}

double coefficient_from_shifted(double shifted_mean, const Interval& iv, double mass) {
  require_interval(iv);
  return std::sqrt(2.0 / iv.width()) * (2.0 * shifted_mean - mass);
}

CosineSeries coeffs_classical(const std::function<double(double)>& pdf, const Interval& iv, std::size_t terms,
                              const QuadratureRule& rule, std::size_t panels) {
  require_interval(iv);
  std::vector<double> x;
  std::vector<double> w;
  composite_nodes(iv, rule, panels, x, w);
  for (std::size_t j = 0; j < x.size(); ++j) w[j] *= pdf(x[j]);
  return project(iv, terms, x, w);
}

CosineSeries coeffs_nig(const NIGParams& p, double t, const Interval& iv, std::size_t terms) {
  require_admissible(p);
  require_interval(iv);
  // Panels also resolve the highest basis frequency (half a period per panel at most).
  const double wavelength = 2.0 * iv.width() / static_cast<double>(std::max<std::size_t>(terms, 1));
  const auto freq_panels = static_cast<std::size_t>(std::ceil(iv.width() / (0.5 * wavelength)));
  const std::size_t panels = std::max(nig_panel_count(p, t, iv), freq_panels);
  std::vector<double> x;
  std::vector<double> w;
  composite_nodes(iv, panel_rule(), panels, x, w);
  std::vector<double> f;
  parallel_fill(f, x.size(), [&](std::size_t j) { return nig_pdf(x[j], p, t); });
  for (std::size_t j = 0; j < x.size(); ++j) w[j] *= f[j];
  return project(iv, terms, x, w);
}

CosineSeries coeffs_from_masses(std::span<const double> nodes, std::span<const double> masses, const Interval& iv,
                                std::size_t terms) {
  require_interval(iv);
  if (nodes.size() != masses.size()) throw DomainError("coeffs_from_masses: size mismatch");
  for (double x : nodes)
    if (!iv.contains(x)) throw DomainError("coeffs_from_masses: node outside interval");
  return project(iv, terms, nodes, masses);
}

double eval_pdf(const CosineSeries& s, double x) {
  if (!s.interval.contains(x)) throw DomainError("eval_pdf: x outside the series interval");
  const double xs[] = {x};
  return cosine_eval(s.coeffs, s.interval, xs, Exec::serial)[0];
}

double eval_cdf(const CosineSeries& s, double x) {
  const double xs[] = {x};
  return cosine_eval_cdf(s.coeffs, s.interval, xs, Exec::serial)[0];
}

std::size_t select_terms(const KSelection& sel, const Interval& iv) {
  require_interval(iv);
  if (!(sel.zeta > 0.0)) throw DomainError("select_terms: zeta must be > 0");
  if (!(sel.epsilon > 0.0)) throw DomainError("select_terms: epsilon must be > 0");
  const double base = 4.0 * sel.zeta * iv.width() / sel.epsilon;
  double k = 0.0;
  if (sel.mode == DecayMode::algebraic) {
    if (!(sel.rate >= 1.0)) throw DomainError("select_terms: algebraic order must be >= 1");
    k = std::ceil(std::pow(base, 1.0 / sel.rate) - 1e-12);
  } else {
    if (!(sel.rate > 0.0)) throw DomainError("select_terms: exponential rate must be > 0");
    k = std::ceil(std::log(base) / sel.rate - 1e-12);
  }
  return static_cast<std::size_t>(std::max(k, 1.0));
}

DecayFit estimate_decay(const CosineSeries& s, double floor) {
  double amax = 0.0;
  for (std::size_t k = 1; k < s.coeffs.size(); ++k) amax = std::max(amax, std::abs(s.coeffs[k]));
  std::vector<double> ks;
  std::vector<double> ys;
  for (std::size_t k = 1; k < s.coeffs.size(); ++k) {
    const double a = std::abs(s.coeffs[k]);
    if (a > floor * amax && a > 0.0) {
      ks.push_back(static_cast<double>(k));
      ys.push_back(std::log(a));
    }
  }
  DecayFit fit;
  fit.used = ks.size();
  if (ks.size() < 2) return fit;
  const double n = static_cast<double>(ks.size());
  double mk = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    my += ys[i];
  }
  mk /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxx += (ks[i] - mk) * (ks[i] - mk);
    sxy += (ks[i] - mk) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.nu = -slope;
  fit.zeta = std::exp(my - slope * mk);
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

Interval choose_interval(const NIGParams& p, double t, double epsilon, double* L_used) {
  require_admissible(p);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("choose_interval: epsilon must lie in (0, 1)");
  double L = 10.0;
  Interval iv = cumulant_interval(p, t, L);
  while (nig_left_tail(p, t, iv.a) > 0.5 * epsilon || nig_right_tail(p, t, iv.b) > epsilon) {
    L += 2.0;
    iv = cumulant_interval(p, t, L);
  }
  if (L_used) *L_used = L;
  return iv;
}

Interval tail_quantile_interval(const NIGParams& p, double t, double epsilon) {
  return nig_quantile_range(p, t, 0.5 * epsilon, epsilon);
}

Interval nig_quantile_range(const NIGParams& p, double t, double left, double right) {
  if (!(left > 0.0 && left < 0.5 && right > 0.0 && right < 0.5))
    throw DomainError("nig_quantile_range: tail probabilities must lie in (0, 0.5)");
  const Interval outer = choose_interval(p, t, std::min(left, right));
  const double c1 = nig_cumulants(p, t).c1;
  // Bisection keeping `outside` on the side where the tail bound holds.
  auto solve = [](auto&& excess, double inside, double outside) {
    for (int i = 0; i < 200 && std::abs(outside - inside) > 1e-12 * (1.0 + std::abs(inside)); ++i) {
      const double m = 0.5 * (inside + outside);
      (excess(m) > 0.0 ? inside : outside) = m;
    }
    return outside;
  };
  const double a = solve([&](double x) { return nig_left_tail(p, t, x) - left; }, c1, outer.a);
  const double b = solve([&](double x) { return nig_right_tail(p, t, x) - right; }, c1, outer.b);
  return {a, b};
}

Interval marginal_interval(const NIGParams& p, double t, double epsilon, IntervalRule rule) {
  return rule == IntervalRule::cumulant ? choose_interval(p, t, epsilon) : tail_quantile_interval(p, t, epsilon);
}

std::vector<double> nig_cdf_reference(const NIGParams& p, double t, std::span<const double> x) {
  require_admissible(p);
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  if (!std::is_sorted(x.begin(), x.end())) throw DomainError("nig_cdf_reference: abscissae must be sorted");
  auto pdf = [&](double y) { return nig_pdf(y, p, t); };
  double acc = nig_left_tail(p, t, x[0]);
  out[0] = acc;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[i - 1]) {
      const Interval piece{x[i - 1], x[i]};
      acc += integrate_composite(pdf, piece.a, piece.b, panel_rule(), nig_panel_count(p, t, piece));
    }
    out[i] = acc;
  }
  return out;
}

SeriesError nig_series_error(const CosineSeries& s, const NIGParams& p, double t, std::size_t points) {
  points = std::max<std::size_t>(points, 2);
  std::vector<double> x(points);
  const Interval& iv = s.interval;
  for (std::size_t i = 0; i < points; ++i)
    x[i] = iv.a + iv.width() * static_cast<double>(i) / static_cast<double>(points - 1);
  x.back() = std::nextafter(iv.b, iv.a);  // F-hat jumps to 1 at b itself
  const auto fhat = cosine_eval(s.coeffs, iv, x);
  const auto Fhat = cosine_eval_cdf(s.coeffs, iv, x);
  const auto F = nig_cdf_reference(p, t, x);
  SeriesError e;
  for (std::size_t i = 0; i < points; ++i) {
    e.pdf_sup = std::max(e.pdf_sup, std::abs(fhat[i] - nig_pdf(x[i], p, t)));
    e.cdf_sup = std::max(e.cdf_sup, std::abs(Fhat[i] - F[i]));
  }
  return e;
}

}  // namespace cqamc
