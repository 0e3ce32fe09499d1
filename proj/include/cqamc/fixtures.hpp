#pragma once

// Calibrated parameter sets for Credit Agricole, AXA and Michelin (one-year
// slices) and the two multi-asset pricing setups built on them.

#include <string>
#include <vector>

#include "cqamc/pricing.hpp"

namespace cqamc::fixtures {

struct AssetFixture {
  std::string name;
  NIGParams params;
  double spot = 0.0;
};

inline constexpr double kExpiry = 1.0;
inline constexpr double kRate = 0.02;
inline constexpr double kDividend = 0.0;
inline constexpr double kLambda = 5e-7;

AssetFixture credit_agricole();
AssetFixture axa();
AssetFixture michelin();
std::vector<AssetFixture> all();

MarketSlice slice_for(const AssetFixture& a);
ExpNIGModel model_for(const AssetFixture& a);

/// AXA and Michelin, rho = -0.25, spread call with K = 0.
MultiAssetModel spread_model(const MarginalOptions& opt = {});
Payoff spread_payoff();

/// AXA, Credit Agricole, Michelin with the three-asset correlation, basket call K = 25.
MultiAssetModel basket_model(const MarginalOptions& opt = {});
Payoff basket_payoff();

}  // namespace cqamc::fixtures
