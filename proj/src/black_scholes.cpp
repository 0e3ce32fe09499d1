#include "cqamc/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqamc/errors.hpp"
#include "cqamc/numerics.hpp"

namespace cqamc {
namespace {

void validate(const BSInputs& in, bool check_vol) {
  if (!(in.spot > 0.0) || !(in.strike > 0.0)) throw DomainError("bs: spot and strike must be > 0");
  if (!(in.expiry > 0.0)) throw DomainError("bs: expiry must be > 0");
  if (!std::isfinite(in.rate) || !std::isfinite(in.dividend)) throw DomainError("bs: non-finite rate");
  if (check_vol && !(in.vol > 0.0 && std::isfinite(in.vol))) throw DomainError("bs: vol must be > 0");
}

}  // namespace

double bs_price(const BSInputs& in, OptionKind kind) {
  validate(in, true);
  const double sq = in.vol * std::sqrt(in.expiry);
  const double d1 =
      (std::log(in.spot / in.strike) + (in.rate - in.dividend + 0.5 * in.vol * in.vol) * in.expiry) / sq;
  const double d2 = d1 - sq;
  const double df_q = std::exp(-in.dividend * in.expiry);
  const double df_r = std::exp(-in.rate * in.expiry);
  if (kind == OptionKind::call)
    return in.spot * df_q * std_normal_cdf(d1) - in.strike * df_r * std_normal_cdf(d2);
  return in.strike * df_r * std_normal_cdf(-d2) - in.spot * df_q * std_normal_cdf(-d1);
}

double bs_vega(const BSInputs& in) {
  validate(in, true);
  const double sq = in.vol * std::sqrt(in.expiry);
  const double d1 =
      (std::log(in.spot / in.strike) + (in.rate - in.dividend + 0.5 * in.vol * in.vol) * in.expiry) / sq;
  return in.spot * std::exp(-in.dividend * in.expiry) * std_normal_pdf(d1) * std::sqrt(in.expiry);
}

double implied_vol(double price, BSInputs in, OptionKind kind) {
  validate(in, false);
  if (!std::isfinite(price)) throw DomainError("implied_vol: non-finite price");

  auto value_at = [&](double vol) {
    in.vol = vol;
    return bs_price(in, kind);
  };
  double lo = kMinImpliedVol;
  double hi = kMaxImpliedVol;
  const double p_lo = value_at(lo);
  const double p_hi = value_at(hi);
  if (price < p_lo - 1e-10 || price > p_hi + 1e-10)
    throw DomainError("implied_vol: price " + std::to_string(price) + " outside attainable range [" +
                      std::to_string(p_lo) + ", " + std::to_string(p_hi) + "]");
  if (std::fabs(price - p_lo) <= 1e-10) return lo;
  if (std::fabs(price - p_hi) <= 1e-10) return hi;

  // Bracketed Newton; bisect whenever the Newton step leaves the bracket.
  double vol = 0.3;
  for (int it = 0; it < 300; ++it) {
    in.vol = vol;
    const double diff = bs_price(in, kind) - price;
    if (std::fabs(diff) <= 1e-12 * std::max(1.0, price)) return vol;
    if (diff > 0.0)
      hi = vol;
    else
      lo = vol;
    const double vega = bs_vega(in);
    double next = vega > 0.0 ? vol - diff / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) return next;
    vol = next;
  }
  throw ConvergenceError("implied_vol: no convergence after 300 iterations");
}

}  // namespace cqamc
