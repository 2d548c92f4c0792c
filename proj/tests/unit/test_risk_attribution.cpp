#include <doctest.h>

#include <cmath>

#include "hesitancy/error.hpp"
#include "hesitancy/risk_attribution.hpp"

using namespace hesitancy;

namespace {

RiskInputs two_step(double lambda) {
  RiskInputs in;
  in.population = 1000;
  in.cases_total = 100;
  in.deaths_total = 100;
  in.vaccinated = {0, 500};
  in.delta_cases = {10, 10};
  in.delta_deaths = {10, 10};
  in.lambda_c = lambda;
  in.lambda_d = lambda;
  return in;
}

}  // namespace

TEST_CASE("two-step fixture by hand") {
  // term1 = 10/900; term2 = (10/900) / [(500/900)(0.07) + 400/900] = 10 / 435.
  const double expect = 10.0 / 900.0 + 10.0 / 435.0;
  CHECK(unvaccinated_case_risk(two_step(0.93)) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(unvaccinated_death_risk(two_step(0.93)) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("limits without effective vaccination") {
  CHECK(unvaccinated_case_risk(two_step(0.0)) == doctest::Approx(20.0 / 900.0).epsilon(1e-14));
  RiskInputs none = two_step(0.93);
  none.vaccinated = {0, 0};
  CHECK(unvaccinated_case_risk(none) == doctest::Approx(20.0 / 900.0).epsilon(1e-14));
  CHECK(unvaccinated_death_risk(none) == doctest::Approx(20.0 / 900.0).epsilon(1e-14));
}

TEST_CASE("risk grows with effectiveness and is bounded below") {
  double prev = 0.0;
  for (double lambda : {0.0, 0.3, 0.6, 0.9, 0.99}) {
    const double p = unvaccinated_case_risk(two_step(lambda));
    CHECK(p >= prev);
    CHECK(p >= 20.0 / 900.0);
    prev = p;
  }
}

TEST_CASE("splitting a step leaves the risk unchanged") {
  RiskInputs split = two_step(0.93);
  split.vaccinated = {0, 500, 500};
  split.delta_cases = {10, 3, 7};
  split.delta_deaths = {10, 3, 7};
  CHECK(unvaccinated_case_risk(split) == doctest::Approx(unvaccinated_case_risk(two_step(0.93))).epsilon(1e-14));
}

TEST_CASE("degenerate coverage and invalid inputs") {
  RiskInputs full = two_step(1.0);
  full.vaccinated = {0, 900};
  CHECK_THROWS_AS(unvaccinated_case_risk(full), DomainError);
  RiskInputs huge = two_step(0.93);
  huge.delta_cases = {600, 600};
  CHECK_THROWS_AS(unvaccinated_case_risk(huge), DomainError);
  RiskInputs bad = two_step(1.5);
  CHECK_THROWS_AS(unvaccinated_case_risk(bad), InvalidInput);
  RiskInputs ragged = two_step(0.9);
  ragged.vaccinated = {0};
  CHECK_THROWS_AS(unvaccinated_case_risk(ragged), InvalidInput);
}

TEST_CASE("attribution arithmetic") {
  const AttributionReport r = attribute_outcomes(14086, 0.0387, 0.00057);
  CHECK(r.attributable_cases == doctest::Approx(545.1282).epsilon(1e-12));
  CHECK(std::round(r.attributable_cases * 10) / 10 == 545.1);
  CHECK(std::round(r.attributable_deaths * 100) / 100 == 8.03);
  CHECK(r.delta_v == 14086);
  const AttributionReport zero = attribute_outcomes(0, 0.0387, 0.00057);
  CHECK(zero.attributable_cases == 0.0);
  CHECK(zero.attributable_deaths == 0.0);
  CHECK_THROWS(attribute_outcomes(-1, 0.1, 0.1));
}

TEST_CASE("risk inputs from a national series") {
  NationalSeries nat;
  nat.population = 1000;
  nat.cum_cases = {90, 100, 110};
  nat.cum_deaths = {1, 2, 4};
  nat.cum_vaccinations = {0, 0, 500};
  nat.dates = {parse_date("2021-01-01"), parse_date("2021-01-02"), parse_date("2021-01-03")};
  const RiskInputs end = risk_inputs_from(nat, 0.93, 0.94);
  CHECK(end.delta_cases == std::vector<double>{10, 10});
  CHECK(end.delta_deaths == std::vector<double>{1, 2});
  CHECK(end.vaccinated == std::vector<double>{0, 500});
  CHECK(end.cases_total == 110);
  CHECK(end.deaths_total == 4);
  const RiskInputs start = risk_inputs_from(nat, 0.93, 0.94, DenominatorTime::period_start);
  CHECK(start.cases_total == 90);
  CHECK(unvaccinated_case_risk(start) == doctest::Approx(10.0 / 910 + (10.0 / 910) / ((500.0 / 910) * 0.07 + 410.0 / 910)));
}
