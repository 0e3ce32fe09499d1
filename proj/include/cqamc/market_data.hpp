#pragma once

// Quote ingestion, put-call parity curve stripping and static-arbitrage checks.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cqamc/nig.hpp"
#include "cqamc/types.hpp"

namespace cqamc {

/// Quotes sharing an underlying and an expiry.
struct QuoteGroup {
  std::string underlying;
  double expiry = 0.0;
  std::vector<OptionQuote> quotes;
};

/// Parses `underlying,expiry_years,strike,kind,bid,ask` CSV (header required).
/// Malformed rows raise ParseError, invariant breaches ValidationError; both
/// carry the 1-based line number.
std::vector<OptionQuote> parse_quotes(std::istream& in);
std::vector<OptionQuote> read_quotes_file(const std::string& path);

/// Groups by (underlying, expiry), preserving row order within each group.
std::vector<QuoteGroup> group_quotes(std::vector<OptionQuote> quotes);

/// Convenience: read, validate and group.
std::vector<QuoteGroup> load_quotes(const std::string& path);

void write_quotes(std::ostream& out, std::span<const OptionQuote> quotes);

struct Curves {
  double discount_factor = 1.0;
  double forward = 0.0;
  double dividend_yield = 0.0;
  double rate = 0.0;
  std::size_t pairs = 0;  // strikes used in the regression
};

/// OLS of (C - P) on K over strikes quoted on both sides: slope = -DF,
/// intercept = FW * DF. Zero-bid quotes are skipped.
Curves strip_curves(std::span<const OptionQuote> quotes, double spot, double expiry);

/// Curves stripped from the group's quotes, attached to a slice.
MarketSlice build_slice(const QuoteGroup& group, double spot);

struct StrikePrice {
  double strike = 0.0;
  double price = 0.0;
};

enum class ArbitrageType { digital, butterfly };

struct Violation {
  ArbitrageType type = ArbitrageType::digital;
  OptionKind kind = OptionKind::call;
  std::vector<double> strikes;  // offending pair or triple
  double value = 0.0;           // digital ratio or convexity residual
};

/// Adjacent-strike implied digital prices must lie strictly inside (0, 1).
/// Strikes must be strictly increasing.
std::vector<Violation> check_digital_arbitrage(std::span<const StrikePrice> mids, OptionKind kind);

/// Convexity in strike for every consecutive triple.
std::vector<Violation> check_butterfly_arbitrage(std::span<const StrikePrice> mids, OptionKind kind);

/// Both checks for calls and puts of one expiry; sorts by strike first.
std::vector<Violation> check_arbitrage(std::span<const OptionQuote> quotes);

/// Repeatedly removes, for each violation, the involved quote with the
/// smallest mid until no violation remains. Returns the removed quotes.
std::vector<OptionQuote> drop_violations(std::vector<OptionQuote>& quotes);

/// Quotes usable for regression and calibration (positive bid).
std::vector<OptionQuote> usable_quotes(std::span<const OptionQuote> quotes);

struct SpreadRule {
  double absolute = 0.0;  // half-width in currency
  double relative = 0.0;  // half-width as a fraction of mid
};

/// Calls and puts at every strike, mid = exponential-NIG model price.
std::vector<OptionQuote> generate_synthetic_quotes(const NIGParams& params, const MarketSlice& skeleton,
                                                   std::span<const double> strikes, const SpreadRule& spread);

}  // namespace cqamc
