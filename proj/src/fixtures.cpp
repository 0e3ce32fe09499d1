#include "cqamc/fixtures.hpp"

namespace cqamc::fixtures {
namespace {

MultiAssetModel build(const std::vector<AssetFixture>& assets, const Eigen::MatrixXd& sigma,
                      const MarginalOptions& opt) {
  MultiAssetModel m;
  std::vector<std::string> names;
  for (const auto& a : assets) {
    m.assets.push_back(make_marginal(a.name, model_for(a), opt));
    names.push_back(a.name);
  }
  m.copula = CopulaSpec::from_matrix(sigma, names);
  m.discount_factor = slice_for(assets.front()).discount_factor;
  return m;
}

}  // namespace

AssetFixture credit_agricole() { return {"CreditAgricole", {4.69, -3.06, 0.18, 0.0}, 12.91}; }
AssetFixture axa() { return {"AXA", {5.24, -3.26, 0.18, 0.0}, 33.8}; }
AssetFixture michelin() { return {"Michelin", {6.2, -3.31, 0.26, 0.0}, 31.76}; }
std::vector<AssetFixture> all() { return {credit_agricole(), axa(), michelin()}; }

MarketSlice slice_for(const AssetFixture& a) {
  return MarketSlice::from_rates(a.name, a.spot, kExpiry, kRate, kDividend);
}

ExpNIGModel model_for(const AssetFixture& a) { return {a.params, slice_for(a)}; }

MultiAssetModel spread_model(const MarginalOptions& opt) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, -0.25, -0.25, 1.0;
  return build({axa(), michelin()}, sigma, opt);
}

Payoff spread_payoff() { return {PayoffKind::spread_call, 0.0, {}}; }

MultiAssetModel basket_model(const MarginalOptions& opt) {
  Eigen::MatrixXd sigma(3, 3);
  sigma << 1.0, -0.2, -0.25, -0.2, 1.0, -0.15, -0.25, -0.15, 1.0;
  return build({axa(), credit_agricole(), michelin()}, sigma, opt);
}

Payoff basket_payoff() { return {PayoffKind::basket_call, 25.0, {}}; }

}  // namespace cqamc::fixtures
