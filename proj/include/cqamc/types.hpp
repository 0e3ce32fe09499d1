#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cqamc {

enum class OptionKind { call, put };

constexpr std::string_view to_string(OptionKind k) { return k == OptionKind::call ? "C" : "P"; }

/// Closed support interval [a, b] with a < b.
struct Interval {
  double a = 0.0;
  double b = 1.0;

  double width() const { return b - a; }
  bool contains(double x) const { return x >= a && x <= b; }
};

struct OptionQuote {
  std::string underlying;
  double expiry = 0.0;  // year fraction
  double strike = 0.0;
  OptionKind kind = OptionKind::call;
  double bid = 0.0;
  double ask = 0.0;
  std::size_t line = 0;  // source line, 0 when synthetic

  double mid() const { return 0.5 * (bid + ask); }
  double spread() const { return ask - bid; }
};

/// One expiry of one underlying, with the curves implied by its quotes.
struct MarketSlice {
  std::string underlying;
  double spot = 0.0;
  double expiry = 0.0;
  double discount_factor = 1.0;
  double forward = 0.0;
  double dividend_yield = 0.0;
  double rate = 0.0;
  std::vector<OptionQuote> quotes;

  /// Slice with consistent DF and forward from continuous rates.
  static MarketSlice from_rates(std::string underlying, double spot, double expiry, double rate,
                                double dividend_yield);
};

}  // namespace cqamc
