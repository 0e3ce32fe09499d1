#include <cmath>

#include "doctest.h"

#include "cqamc/errors.hpp"
#include "cqamc/fixtures.hpp"
#include "cqamc/studies.hpp"

using namespace cqamc;

namespace {

CoeffStudyConfig small_coeffs() {
  CoeffStudyConfig c;
  c.repetitions = 4;
  c.samples = pow2_ladder(8, 11);
  c.epsilons = halving_ladder(0.05, 4);
  c.ratio_samples = 256;
  c.ratio_epsilon = 0.0125;
  return c;
}

}  // namespace

TEST_CASE("ladders") {
  CHECK(pow2_ladder(3, 5) == std::vector<std::size_t>{8, 16, 32});
  CHECK(halving_ladder(1.0, 3) == std::vector<double>{1.0, 0.5, 0.25});
}

TEST_CASE("percentiles and summaries") {
  const std::vector<double> v{4, 1, 3, 2, 5};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 5.0);
  CHECK(percentile(v, 0.5) == 3.0);
  CHECK(percentile(v, 0.25) == 2.0);
  CHECK(percentile(v, 0.1) == doctest::Approx(1.4));

  const auto r = summarize("cmc", 100, 100, v);
  CHECK(r.mean_abs_err == 3.0);
  CHECK(r.repetitions == 5);
  CHECK(r.ci90_lo <= r.mean_abs_err);
  CHECK(r.mean_abs_err <= r.ci90_hi);
  const std::vector<double> skewed{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 100};
  const auto s = summarize("cmc", 1, 1, skewed);
  CHECK(s.ci90_lo <= s.mean_abs_err);
  CHECK(s.mean_abs_err <= s.ci90_hi);
}

TEST_CASE("log-log fits") {
  std::vector<ConvergenceRecord> recs;
  for (int i = 0; i < 6; ++i) {
    const double cost = std::pow(2.0, 8 + i);
    recs.push_back({"cmc", cost, 3.0 * std::pow(cost, -0.5), 0, 0, 1, cost});
  }
  recs.front().mean_abs_err = 10.0;  // trimmed
  const auto f = fit_loglog(recs);
  CHECK(f.used == 4);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cost_at_error(f, 3.0 * std::pow(1e4, -0.5)) == doctest::Approx(1e4).epsilon(1e-10));
  CHECK(fit_loglog(recs, 0).slope != doctest::Approx(-0.5).epsilon(1e-6));
  CHECK_THROWS_AS(fit_loglog(std::span(recs).first(3)), DomainError);

  recs.push_back({"qamc", 1, 1, 0, 0, 1, 1});
  CHECK(records_of(recs, "qamc").size() == 1);
  CHECK(records_of(recs, "cmc").size() == 6);
}

TEST_CASE("study configs are validated") {
  auto c = small_coeffs();
  c.samples.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_coeffs();
  c.epsilons = {0.01, 0.02};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_coeffs();
  c.samples = {512, 256};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_coeffs();
  c.repetitions = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(study_coeffs(c), ValidationError);

  DensityStudyConfig d;
  d.terms.clear();
  CHECK_THROWS_AS(d.validate(), ValidationError);
  PriceStudyConfig p;
  p.epsilons.clear();
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("coefficient study records") {
  const auto cfg = small_coeffs();
  const auto r = study_coeffs(cfg);
  CHECK(r.truth.size() == cfg.terms);
  CHECK(records_of(r.records, "cmc").size() == cfg.samples.size());
  CHECK(records_of(r.records, "qamc").size() == cfg.epsilons.size());
  for (const auto& rec : r.records) {
    CHECK(rec.repetitions == cfg.repetitions);
    CHECK(rec.ci90_lo <= rec.mean_abs_err);
    CHECK(rec.mean_abs_err <= rec.ci90_hi);
  }
  CHECK(r.cmc_per_k.size() == cfg.terms);
  CHECK(r.qamc_per_k.size() == cfg.terms);
  CHECK_FALSE(r.run_log.empty());

  const auto s = study_coeffs(cfg, Exec::serial);
  REQUIRE(s.records.size() == r.records.size());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    CHECK(s.records[i].mean_abs_err == r.records[i].mean_abs_err);
    CHECK(s.records[i].cost == r.records[i].cost);
  }
  CHECK(s.cmc_ratio == r.cmc_ratio);
}

TEST_CASE("density study rows") {
  DensityStudyConfig cfg;
  cfg.terms = {8, 16};
  cfg.repetitions = 3;
  cfg.cost = 2000;
  cfg.points = 201;
  const auto r = study_density(cfg);
  CHECK(r.rows.size() == 6);
  for (const auto& row : r.rows) {
    CHECK(row.pdf_sup_lo <= row.pdf_sup_median);
    CHECK(row.pdf_sup_median <= row.pdf_sup_hi);
    if (row.method != "grid") CHECK(row.mean_cost <= 2000.0);
  }
}

TEST_CASE("price study records") {
  PriceStudyConfig cfg;
  cfg.name = "spread";
  cfg.repetitions = 4;
  cfg.samples = pow2_ladder(8, 11);
  cfg.epsilons = halving_ladder(1e-2, 4);
  const auto r = study_price(fixtures::spread_model(), fixtures::spread_payoff(), cfg);
  CHECK(r.reference == doctest::Approx(6.3275221233652816).epsilon(1e-10));
  CHECK(records_of(r.records, "cmc").size() == 4);
  CHECK(records_of(r.records, "qamc-joint").size() == 4);
  CHECK(records_of(r.records, "qamc-independent").size() == 4);
  CHECK(r.c_max > 1.0);

  const auto again = study_price(fixtures::spread_model(), fixtures::spread_payoff(), cfg);
  for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(again.records[i].mean_abs_err == r.records[i].mean_abs_err);
}
