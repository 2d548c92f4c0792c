#include "hesitancy/priors.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hesitancy/error.hpp"

namespace hesitancy {

double PriorTerm::log_density(double x) const {
  if (!in_support(x)) return -std::numeric_limits<double>::infinity();
  if (family == Family::normal) {
    const double z = (x - a) / b;
    return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
}

double PriorTerm::d_log_density(double x) const {
  if (family == Family::normal) return -(x - a) / (b * b);
  return (a - 1.0) / x - b;
}

void PriorTerm::validate(std::string_view name) const {
  const std::string n(name);
  if (!(b > 0.0)) throw InvalidInput("prior for " + n + ": scale/rate must be positive");
  if (family == Family::gamma && !(a > 0.0)) throw InvalidInput("prior for " + n + ": shape must be positive");
  if (!(lower < upper)) throw InvalidInput("prior for " + n + ": lower bound must be below upper bound");
  if (family == Family::gamma && lower < 0.0) throw InvalidInput("prior for " + n + ": gamma support is positive");
}

void PriorSpec::validate() const {
  beta.validate("beta");
  rho.validate("rho");
  nu.validate("nu");
  gamma_e.validate("gamma_e");
  gamma_p.validate("gamma_p");
  gamma_a.validate("gamma_a");
  alpha0.validate("alpha0");
  phi.validate("phi");
}

double log_prior(const ModelParams& params, const PriorSpec& priors, ModelVariant variant) {
  double lp = 0.0;
  for (double b : params.beta) lp += priors.beta.log_density(b);
  lp += priors.rho.log_density(params.rho);
  for (double n : params.nu) lp += priors.nu.log_density(n);
  if (has_dynamic_alpha(variant)) {
    lp += priors.gamma_e.log_density(params.gamma_e);
    lp += priors.gamma_p.log_density(params.gamma_p);
  }
  if (variant == ModelVariant::sirva_wom) lp += priors.gamma_a.log_density(params.gamma_a);
  if (has_alpha(variant))
    for (double a : params.alpha0) lp += priors.alpha0.log_density(a);
  for (double p : params.phi) lp += priors.phi.log_density(p);
  return lp;
}

}  // namespace hesitancy
