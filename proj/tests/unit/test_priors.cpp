#include <doctest.h>

#include <cmath>
#include <limits>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "hesitancy/priors.hpp"

using namespace hesitancy;

namespace {

double normal_logpdf(double x, double m, double s) {
  return std::log(boost::math::pdf(boost::math::normal_distribution<double>(m, s), x));
}

ModelParams at_means() {
  ModelParams p;
  p.beta = {0.2, 0.2};
  p.rho = 0.1;
  p.nu = {0.0025};
  p.gamma_e = 0.0;
  p.gamma_p = 0.0;
  p.alpha0 = {0.2, 0.2, 0.2};
  p.phi = {1.0, 2.0, 3.0, 4.0};
  return p;
}

}  // namespace

TEST_CASE("normal prior terms at their means") {
  const PriorSpec pr;
  for (double sd : {0.3, 0.1, 1.0, 0.5})
    CHECK(PriorTerm::normal(0.7, sd).log_density(0.7) == doctest::Approx(-std::log(sd * std::sqrt(2 * M_PI))));
  CHECK(pr.gamma_e.log_density(0.18) == doctest::Approx(normal_logpdf(0.18, 0.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("alpha0 outside its support has zero prior mass") {
  const PriorSpec pr;
  CHECK(pr.alpha0.log_density(-0.1) == -std::numeric_limits<double>::infinity());
  CHECK(pr.alpha0.log_density(1.01) == -std::numeric_limits<double>::infinity());
  ModelParams p = at_means();
  p.alpha0[1] = -0.1;
  CHECK(log_prior(p, pr, ModelVariant::sirva) == -std::numeric_limits<double>::infinity());
  // alpha0 does not enter the sirv prior.
  CHECK(std::isfinite(log_prior(p, pr, ModelVariant::sirv)));
}

TEST_CASE("gamma prior uses the rate parameterization") {
  const PriorSpec pr;
  const boost::math::gamma_distribution<double> ref(1.0, 1.0 / 6.0);
  for (double x : {0.01, 0.167, 2.0, 40.0})
    CHECK(pr.phi.log_density(x) == doctest::Approx(std::log(boost::math::pdf(ref, x))).epsilon(1e-12));
}

TEST_CASE("log prior sums the terms present in each variant") {
  const PriorSpec pr;
  ModelParams p = at_means();
  p.gamma_e = 0.18;
  p.gamma_p = 0.01;
  p.gamma_a = 0.3;
  double common = 2 * normal_logpdf(0.2, 0.2, 0.3) + normal_logpdf(0.1, 0.1, 0.3) + normal_logpdf(0.0025, 0.0025, 0.1);
  for (double f : p.phi) common += std::log(6.0) - 6.0 * f;
  const double alpha = 3 * normal_logpdf(0.2, 0.2, 0.5);
  const double gammas = normal_logpdf(0.18, 0, 1) + normal_logpdf(0.01, 0, 0.5);
  CHECK(log_prior(p, pr, ModelVariant::sirv) == doctest::Approx(common).epsilon(1e-12));
  CHECK(log_prior(p, pr, ModelVariant::sirva_static) == doctest::Approx(common + alpha).epsilon(1e-12));
  CHECK(log_prior(p, pr, ModelVariant::sirva) == doctest::Approx(common + alpha + gammas).epsilon(1e-12));
  CHECK(log_prior(p, pr, ModelVariant::sirva_wom) ==
        doctest::Approx(common + alpha + gammas + normal_logpdf(0.3, 0, 0.5)).epsilon(1e-12));
}

TEST_CASE("prior derivatives match finite differences") {
  const PriorSpec pr;
  const double h = 1e-6;
  for (const PriorTerm* t : {&pr.beta, &pr.gamma_e, &pr.phi}) {
    const double x = 0.37;
    CHECK(t->d_log_density(x) ==
          doctest::Approx((t->log_density(x + h) - t->log_density(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("invalid priors are rejected") {
  PriorSpec pr;
  pr.rho.b = 0.0;
  CHECK_THROWS(pr.validate());
  PriorSpec q;
  q.alpha0.lower = 2.0;
  CHECK_THROWS(q.validate());
}
