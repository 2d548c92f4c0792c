#include "hesitancy/risk_attribution.hpp"

#include <cmath>
#include <span>

#include "hesitancy/error.hpp"

namespace hesitancy {

namespace {

double unvaccinated_risk(std::span<const double> deltas, std::span<const double> vaccinated, double n,
                         double total, double lambda, const char* what) {
  const double pool = n - total;
  if (!(pool > 0.0)) throw DomainError(std::string(what) + " risk: N minus the denominator total must be positive");
  double p = 0.0;
  for (std::size_t t = 0; t < deltas.size(); ++t) {
    const double bracket = (vaccinated[t] / pool) * (1.0 - lambda) + (pool - vaccinated[t]) / pool;
    if (!(bracket > 0.0))
      throw DomainError(std::string(what) + " risk: degenerate coverage at step " + std::to_string(t));
    p += (deltas[t] / pool) / bracket;
  }
  if (!(p <= 1.0)) throw DomainError(std::string(what) + " risk exceeds 1; inputs are inconsistent");
  return p;
}

}  // namespace

void RiskInputs::validate() const {
  if (!(population > 0.0)) throw InvalidInput("risk inputs: population must be positive");
  if (delta_cases.size() != vaccinated.size() || delta_deaths.size() != vaccinated.size())
    throw InvalidInput("risk inputs: series lengths differ");
  for (double l : {lambda_c, lambda_d})
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidInput("risk inputs: effectiveness must lie in [0, 1]");
  for (double v : vaccinated)
    if (!(v >= 0.0 && v <= population)) throw InvalidInput("risk inputs: vaccinated count outside [0, N]");
}

RiskInputs risk_inputs_from(const NationalSeries& nat, double lambda_c, double lambda_d,
                            DenominatorTime denominator) {
  if (nat.cum_cases.size() < 2) throw InvalidInput("national series needs at least two days");
  RiskInputs in;
  in.population = nat.population;
  in.lambda_c = lambda_c;
  in.lambda_d = lambda_d;
  for (std::size_t t = 1; t < nat.cum_cases.size(); ++t) {
    in.delta_cases.push_back(nat.cum_cases[t] - nat.cum_cases[t - 1]);
    in.delta_deaths.push_back(nat.cum_deaths[t] - nat.cum_deaths[t - 1]);
    in.vaccinated.push_back(nat.cum_vaccinations[t]);
  }
  const std::size_t at = denominator == DenominatorTime::period_end ? nat.cum_cases.size() - 1 : 0;
  in.cases_total = nat.cum_cases[at];
  in.deaths_total = nat.cum_deaths[at];
  in.validate();
  return in;
}

double unvaccinated_case_risk(const RiskInputs& in) {
  in.validate();
  return unvaccinated_risk(in.delta_cases, in.vaccinated, in.population, in.cases_total, in.lambda_c, "case");
}

double unvaccinated_death_risk(const RiskInputs& in) {
  in.validate();
  return unvaccinated_risk(in.delta_deaths, in.vaccinated, in.population, in.deaths_total, in.lambda_d, "death");
}

AttributionReport attribute_outcomes(double delta_v, double p_case, double p_death) {
  for (double x : {delta_v, p_case, p_death})
    if (!std::isfinite(x) || x < 0.0) throw InvalidInput("attribution inputs must be finite and non-negative");
  return {delta_v, p_case, p_death, delta_v * p_case, delta_v * p_death};
}

}  // namespace hesitancy
