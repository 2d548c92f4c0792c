#pragma once

#include <vector>

#include "hesitancy/data_io.hpp"

namespace hesitancy {

enum class DenominatorTime { period_end, period_start };

struct RiskInputs {
  // Aligned per-step series: new cases, new deaths, cumulative vaccinated at step end.
  std::vector<double> delta_cases;
  std::vector<double> delta_deaths;
  std::vector<double> vaccinated;
  double population = 0.0;
  // Cumulative cases and deaths used in the N - C and N - D denominators.
  double cases_total = 0.0;
  double deaths_total = 0.0;
  double lambda_c = 0.93;
  double lambda_d = 0.94;

  // Throws InvalidInput on misaligned series, lambda outside [0, 1] or V_t > N.
  void validate() const;
};

// Daily steps over the whole national series. Denominator totals are the
// cumulative counts at the chosen end of the period.
RiskInputs risk_inputs_from(const NationalSeries& national, double lambda_c, double lambda_d,
                            DenominatorTime denominator = DenominatorTime::period_end);

// sum_t dC_t/(N-C) / [ (V_t/(N-C))(1-lambda_C) + (N-C-V_t)/(N-C) ].
// DomainError when a bracket is <= 0 or the result exceeds 1.
double unvaccinated_case_risk(const RiskInputs& inputs);
double unvaccinated_death_risk(const RiskInputs& inputs);

struct AttributionReport {
  double delta_v = 0.0;
  double p_case_unvax = 0.0;
  double p_death_unvax = 0.0;
  double attributable_cases = 0.0;
  double attributable_deaths = 0.0;
};

AttributionReport attribute_outcomes(double delta_v, double p_case, double p_death);

}  // namespace hesitancy
