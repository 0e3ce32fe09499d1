#include "cqamc/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "cqamc/errors.hpp"

namespace cqamc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, const char* name, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(v))
    throw ParseError(std::string("cannot parse ") + name + " '" + std::string(field) + "'", line);
  return v;
}

struct PairedMids {
  double strike;
  double call;
  double put;
};

std::vector<PairedMids> pair_mids(std::span<const OptionQuote> quotes) {
  std::map<double, std::pair<double, double>> by_strike;
  std::map<double, int> seen;
  for (const auto& q : quotes) {
    if (!(q.bid > 0.0)) continue;
    auto& slot = by_strike.try_emplace(q.strike, std::nan(""), std::nan("")).first->second;
    (q.kind == OptionKind::call ? slot.first : slot.second) = q.mid();
  }
  std::vector<PairedMids> out;
  for (const auto& [k, cp] : by_strike)
    if (!std::isnan(cp.first) && !std::isnan(cp.second)) out.push_back({k, cp.first, cp.second});
  return out;
}

std::vector<StrikePrice> sorted_mids(std::span<const OptionQuote> quotes, OptionKind kind) {
  std::vector<StrikePrice> out;
  for (const auto& q : quotes)
    if (q.kind == kind) out.push_back({q.strike, q.mid()});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.strike < b.strike || (a.strike == b.strike && a.price < b.price);
  });
  return out;
}

void require_increasing(std::span<const StrikePrice> mids) {
  for (std::size_t i = 1; i < mids.size(); ++i)
    if (!(mids[i].strike > mids[i - 1].strike))
      throw ValidationError("arbitrage check: strikes must be strictly increasing");
}

}  // namespace

MarketSlice MarketSlice::from_rates(std::string underlying, double spot, double expiry, double rate,
                                    double dividend_yield) {
  MarketSlice s;
  s.underlying = std::move(underlying);
  s.spot = spot;
  s.expiry = expiry;
  s.rate = rate;
  s.dividend_yield = dividend_yield;
  s.discount_factor = std::exp(-rate * expiry);
  s.forward = spot * std::exp((rate - dividend_yield) * expiry);
  return s;
}

std::vector<OptionQuote> parse_quotes(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<OptionQuote> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (!header_seen) {
      static constexpr std::string_view expected[] = {"underlying", "expiry_years", "strike", "kind", "bid", "ask"};
      if (fields.size() != 6 || !std::equal(fields.begin(), fields.end(), std::begin(expected)))
        throw ParseError("expected header underlying,expiry_years,strike,kind,bid,ask", line_no);
      header_seen = true;
      continue;
    }
    if (fields.size() != 6) throw ParseError("expected 6 columns, got " + std::to_string(fields.size()), line_no);
    OptionQuote q;
    q.line = line_no;
    q.underlying = std::string(fields[0]);
    if (q.underlying.empty()) throw ParseError("empty underlying", line_no);
    q.expiry = parse_number(fields[1], "expiry_years", line_no);
    q.strike = parse_number(fields[2], "strike", line_no);
    if (fields[3] == "C")
      q.kind = OptionKind::call;
    else if (fields[3] == "P")
      q.kind = OptionKind::put;
    else
      throw ParseError("kind must be C or P, got '" + std::string(fields[3]) + "'", line_no);
    q.bid = parse_number(fields[4], "bid", line_no);
    q.ask = parse_number(fields[5], "ask", line_no);

    if (!(q.expiry > 0.0)) throw ValidationError("expiry must be > 0", line_no);
    if (!(q.strike > 0.0)) throw ValidationError("strike must be > 0", line_no);
    if (q.bid < 0.0) throw ValidationError("bid must be >= 0", line_no);
    if (q.ask < q.bid) throw ValidationError("ask below bid", line_no);
    out.push_back(std::move(q));
  }
  if (!header_seen) throw ParseError("missing header");
  return out;
}

std::vector<OptionQuote> read_quotes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open quote file " + path);
  return parse_quotes(in);
}

std::vector<QuoteGroup> group_quotes(std::vector<OptionQuote> quotes) {
  std::map<std::pair<std::string, double>, QuoteGroup> groups;
  for (auto& q : quotes) {
    auto& g = groups[{q.underlying, q.expiry}];
    g.underlying = q.underlying;
    g.expiry = q.expiry;
    g.quotes.push_back(std::move(q));
  }
  std::vector<QuoteGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<QuoteGroup> load_quotes(const std::string& path) { return group_quotes(read_quotes_file(path)); }

void write_quotes(std::ostream& out, std::span<const OptionQuote> quotes) {
  out << "underlying,expiry_years,strike,kind,bid,ask\n";
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  for (const auto& q : quotes)
    out << q.underlying << ',' << q.expiry << ',' << q.strike << ',' << to_string(q.kind) << ',' << q.bid << ','
        << q.ask << '\n';
  out.precision(old_precision);
}

Curves strip_curves(std::span<const OptionQuote> quotes, double spot, double expiry) {
  if (!(spot > 0.0) || !(expiry > 0.0)) throw DomainError("strip_curves: spot and expiry must be > 0");
  const auto pairs = pair_mids(quotes);
  if (pairs.size() < 2)
    throw ValidationError("strip_curves: need call and put mids at >= 2 strikes, have " +
                          std::to_string(pairs.size()));
  // Centered OLS.
  double mean_k = 0.0;
  double mean_y = 0.0;
  for (const auto& p : pairs) {
    mean_k += p.strike;
    mean_y += p.call - p.put;
  }
  mean_k /= static_cast<double>(pairs.size());
  mean_y /= static_cast<double>(pairs.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : pairs) {
    const double dk = p.strike - mean_k;
    sxx += dk * dk;
    sxy += dk * (p.call - p.put - mean_y);
  }
  if (!(sxx > 1e-12 * std::max(1.0, mean_k * mean_k)))
    throw ValidationError("strip_curves: degenerate regression (all strikes equal)");
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_k;

  Curves c;
  c.pairs = pairs.size();
  c.discount_factor = -slope;
  if (!(c.discount_factor > 0.0 && c.discount_factor < 1.2))
    throw ValidationError("strip_curves: discount factor " + std::to_string(c.discount_factor) +
                          " outside (0, 1.2)");
  c.forward = intercept / c.discount_factor;
  if (!(c.forward > 0.0)) throw ValidationError("strip_curves: non-positive forward");
  c.rate = -std::log(c.discount_factor) / expiry;
  c.dividend_yield = c.rate - std::log(c.forward / spot) / expiry;
  return c;
}

MarketSlice build_slice(const QuoteGroup& group, double spot) {
  const Curves c = strip_curves(group.quotes, spot, group.expiry);
  MarketSlice s;
  s.underlying = group.underlying;
  s.spot = spot;
  s.expiry = group.expiry;
  s.discount_factor = c.discount_factor;
  s.forward = c.forward;
  s.rate = c.rate;
  s.dividend_yield = c.dividend_yield;
  s.quotes = group.quotes;
  return s;
}

std::vector<Violation> check_digital_arbitrage(std::span<const StrikePrice> mids, OptionKind kind) {
  require_increasing(mids);
  std::vector<Violation> out;
  for (std::size_t i = 1; i < mids.size(); ++i) {
    const double dk = mids[i].strike - mids[i - 1].strike;
    const double ratio = kind == OptionKind::call ? (mids[i - 1].price - mids[i].price) / dk
                                                  : (mids[i].price - mids[i - 1].price) / dk;
    if (!(ratio > 0.0 && ratio < 1.0))
      out.push_back({ArbitrageType::digital, kind, {mids[i - 1].strike, mids[i].strike}, ratio});
  }
  return out;
}

std::vector<Violation> check_butterfly_arbitrage(std::span<const StrikePrice> mids, OptionKind kind) {
  require_increasing(mids);
  if (mids.size() < 3) throw ValidationError("butterfly check: need at least 3 strikes");
  std::vector<Violation> out;
  for (std::size_t i = 2; i < mids.size(); ++i) {
    const auto& k1 = mids[i - 2];
    const auto& k2 = mids[i - 1];
    const auto& k3 = mids[i];
    const double ratio = (k2.strike - k1.strike) / (k3.strike - k2.strike);
    // Call and put conditions share the same form: convexity of price in strike.
    const double residual = k1.price - k2.price - ratio * (k2.price - k3.price);
    if (residual < 0.0) out.push_back({ArbitrageType::butterfly, kind, {k1.strike, k2.strike, k3.strike}, residual});
  }
  return out;
}

std::vector<Violation> check_arbitrage(std::span<const OptionQuote> quotes) {
  std::vector<Violation> out;
  for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
    const auto mids = sorted_mids(quotes, kind);
    if (mids.size() >= 2) {
      auto d = check_digital_arbitrage(mids, kind);
      out.insert(out.end(), d.begin(), d.end());
    }
    if (mids.size() >= 3) {
      auto b = check_butterfly_arbitrage(mids, kind);
      out.insert(out.end(), b.begin(), b.end());
    }
  }
  return out;
}

std::vector<OptionQuote> drop_violations(std::vector<OptionQuote>& quotes) {
  std::vector<OptionQuote> dropped;
  for (;;) {
    const auto violations = check_arbitrage(quotes);
    if (violations.empty()) break;
    const Violation& v = violations.front();
    // Smallest-mid quote among the strikes of the offending tuple.
    auto victim = quotes.end();
    for (auto it = quotes.begin(); it != quotes.end(); ++it) {
      if (it->kind != v.kind) continue;
      if (std::find(v.strikes.begin(), v.strikes.end(), it->strike) == v.strikes.end()) continue;
      if (victim == quotes.end() || it->mid() < victim->mid()) victim = it;
    }
    if (victim == quotes.end()) break;
    dropped.push_back(*victim);
    quotes.erase(victim);
  }
  return dropped;
}

std::vector<OptionQuote> usable_quotes(std::span<const OptionQuote> quotes) {
  std::vector<OptionQuote> out;
  for (const auto& q : quotes)
    if (q.bid > 0.0) out.push_back(q);
  return out;
}

std::vector<OptionQuote> generate_synthetic_quotes(const NIGParams& params, const MarketSlice& skeleton,
                                                   std::span<const double> strikes, const SpreadRule& spread) {
  const NigPricer pricer(ExpNIGModel{params, skeleton});
  std::vector<OptionQuote> out;
  out.reserve(2 * strikes.size());
  for (double k : strikes) {
    if (!(k > 0.0)) throw DomainError("generate_synthetic_quotes: strikes must be > 0");
    for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
      const double mid = pricer.price(k, kind);
      const double half = spread.absolute + spread.relative * mid;
      OptionQuote q;
      q.underlying = skeleton.underlying;
      q.expiry = skeleton.expiry;
      q.strike = k;
      q.kind = kind;
      q.bid = std::max(mid - half, 0.0);
      q.ask = q.bid + 2.0 * half;
      if (q.bid == 0.0) q.ask = 2.0 * mid;  // keep the mid when the bid floors at zero
      out.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace cqamc
