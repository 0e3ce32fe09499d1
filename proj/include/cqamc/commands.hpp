#pragma once

// Command implementations behind the CLI. Each reads its inputs from the
// config and from artifacts earlier commands wrote to the output directory.

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "cqamc/io.hpp"
#include "cqamc/kernels.hpp"

namespace cqamc {

struct RunOptions {
  AppConfig config;
  std::filesystem::path out = "out";
  bool drop_violations = false;
  Exec exec = Exec::parallel;
  std::ostream* log = nullptr;  // progress lines; null for silence
};

/// Exit status of arb-check when violations remain.
inline constexpr int kArbitrageExit = 2;

int cmd_ingest(const RunOptions& opt);
int cmd_curves(const RunOptions& opt);
int cmd_arb_check(const RunOptions& opt);
int cmd_calibrate(const RunOptions& opt);
int cmd_density(const RunOptions& opt);
int cmd_price(const RunOptions& opt);
/// which: coeffs, density or price.
int cmd_study(const RunOptions& opt, std::string_view which);
/// ingest, curves, arb-check, calibrate, density, price; errors carry the stage name.
int cmd_pipeline(const RunOptions& opt);
/// Synthetic three-asset bundle from the fixture parameters: quotes.csv,
/// correlation.json and config.json.
int cmd_synth(const RunOptions& opt);

}  // namespace cqamc
