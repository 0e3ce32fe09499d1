#pragma once

#include "cqamc/types.hpp"

namespace cqamc {

struct BSInputs {
  double spot = 0.0;
  double strike = 0.0;
  double expiry = 0.0;
  double rate = 0.0;
  double dividend = 0.0;
  double vol = 0.0;
};

/// Black-Scholes price of a European call or put with continuous dividend yield.
double bs_price(const BSInputs& in, OptionKind kind);

/// Derivative of the price with respect to vol.
double bs_vega(const BSInputs& in);

inline constexpr double kMinImpliedVol = 1e-4;
inline constexpr double kMaxImpliedVol = 5.0;

/// Vol reproducing `price` to 1e-10 absolute. `in.vol` is ignored.
/// Throws DomainError when the price lies outside what vols in
/// [kMinImpliedVol, kMaxImpliedVol] can produce, ConvergenceError if the
/// root finder stalls.
double implied_vol(double price, BSInputs in, OptionKind kind);

}  // namespace cqamc
