#include "hesitancy/negbin.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "hesitancy/error.hpp"

namespace hesitancy {

NegBinChannel::NegBinChannel(double p)
    : phi(p), log_phi(std::log(p)), lgamma_phi(std::lgamma(p)), digamma_phi(boost::math::digamma(p)) {}

double neg_binomial_log_pmf(double x, double mu, double phi) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("negative binomial: x must be a non-negative count");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("negative binomial: mu must be positive, got " + std::to_string(mu));
  if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("negative binomial: phi must be positive, got " + std::to_string(phi));
  return neg_binomial_log_term(x, std::lgamma(x + 1.0), mu, NegBinChannel(phi));
}

double neg_binomial_log_term(double x, double lgamma_x1, double mu, const NegBinChannel& c) {
  const double log_sum = std::log(mu + c.phi);
  const double x_term = x > 0.0 ? x * (std::log(mu) - log_sum) : 0.0;
  return std::lgamma(x + c.phi) - c.lgamma_phi - lgamma_x1 + x_term + c.phi * (c.log_phi - log_sum);
}

NegBinTerm neg_binomial_term(double x, double lgamma_x1, double mu, const NegBinChannel& c) {
  const double sum = mu + c.phi;
  const double log_sum = std::log(sum);
  const double x_term = x > 0.0 ? x * (std::log(mu) - log_sum) : 0.0;
  NegBinTerm t;
  t.log_pmf = std::lgamma(x + c.phi) - c.lgamma_phi - lgamma_x1 + x_term + c.phi * (c.log_phi - log_sum);
  const double ratio = (x + c.phi) / sum;
  t.d_mu = x / mu - ratio;
  t.d_phi = (x > 0.0 ? boost::math::digamma(x + c.phi) - c.digamma_phi : 0.0) + (c.log_phi - log_sum) + 1.0 - ratio;
  return t;
}

}  // namespace hesitancy
