#pragma once

// JSON and CSV artifacts: curves, calibration reports, cosine series,
// correlation matrices, price reports, study tables and the run config.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqamc/calibration.hpp"
#include "cqamc/copula.hpp"
#include "cqamc/cosine_density.hpp"
#include "cqamc/market_data.hpp"
#include "cqamc/pricing.hpp"
#include "cqamc/studies.hpp"

namespace cqamc {

using Json = nlohmann::json;

Json curves_json(const std::string& underlying, double expiry, const Curves& c);

Json calibration_json(const std::string& underlying, double expiry, const CalibrationResult& r, double lambda);

/// Reads {underlying, expiry_years, alpha, beta, delta, ...}.
struct CalibratedAsset {
  std::string underlying;
  double expiry = 0.0;
  NIGParams params;
};
CalibratedAsset calibrated_asset_from_json(const Json& j);

Json series_json(const CosineSeries& s);
CosineSeries series_from_json(const Json& j);

Json correlation_json(const CopulaSpec& spec);
/// {assets: [...], sigma: [[...]]}; validated through CopulaSpec::from_matrix.
CopulaSpec correlation_from_json(const Json& j);

Json price_json(const Payoff& payoff, Formulation f, const PriceEstimate& e, std::uint64_t seed);

Json violation_json(const Violation& v);

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records);
void write_density_csv(std::ostream& os, std::span<const DensityRow> rows);
void write_run_log(std::ostream& os, std::span<const RunLogEntry> entries);

Json fit_json(const LineFit& f);

/// Reads a JSON file; ParseError with the path on failure.
Json read_json_file(const std::filesystem::path& path);
/// Writes with 2-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

struct PriceConfig {
  Payoff payoff{PayoffKind::basket_call, 25.0, {}};
  std::vector<std::string> assets;  // empty: every calibrated asset, in file order
  std::size_t qubits = 2;           // per dimension
  double grid_tail = kDefaultGridTail;
  CellMass cell_mass = CellMass::cell_probability;
  std::size_t samples = 100000;
  double epsilon = 1e-3;  // amplitude level
  double rho = 0.05;
};

struct StudyPriceSetup {
  std::string name;
  std::size_t qubits = 3;
};

/// Run configuration; every field has a default. See docs/config.md.
struct AppConfig {
  std::optional<std::string> quotes;            // quote CSV path
  std::map<std::string, double> spots;          // underlying -> spot
  std::optional<CopulaSpec> correlation;        // inline or from a file
  CalibrationConfig calibration;
  MarginalOptions density;
  PriceConfig price;
  CoeffStudyConfig coeffs;
  DensityStudyConfig density_study;
  PriceStudyConfig price_study;
  std::vector<StudyPriceSetup> price_setups{{"spread", 3}, {"basket", 2}};
  std::uint64_t seed = 1;
  std::size_t synth_strikes = 21;
  SpreadRule synth_spread{0.005, 0.01};
};

/// Sets the run seed and derives the study seeds from it.
void set_seed(AppConfig& cfg, std::uint64_t seed);

/// Relative paths inside the config resolve against `base_dir`.
AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);

}  // namespace cqamc
