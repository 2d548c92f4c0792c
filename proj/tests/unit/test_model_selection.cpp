#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/negative_binomial.hpp>

#include "hesitancy/error.hpp"
#include "hesitancy/model_selection.hpp"
#include "hesitancy/synthetic.hpp"

using namespace hesitancy;

namespace {

double log_binomial(int y, int n, double theta) {
  return std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0) + y * std::log(theta) +
         (n - y) * std::log1p(-theta);
}

double log_beta_binomial(int y, int n, double a, double b) {
  auto lbeta = [](double x, double z) { return std::lgamma(x) + std::lgamma(z) - std::lgamma(x + z); };
  return std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0) + lbeta(y + a, n - y + b) - lbeta(a, b);
}

double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng);
  return x / (x + gb(rng));
}

PointwiseLogLik random_loglik(std::size_t draws, std::size_t points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(-3.0, 0.7);
  PointwiseLogLik ll;
  ll.values.resize(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(points));
  for (Eigen::Index s = 0; s < ll.values.rows(); ++s)
    for (Eigen::Index p = 0; p < ll.values.cols(); ++p) ll.values(s, p) = z(rng);
  return ll;
}

}  // namespace

TEST_CASE("PSIS-LOO matches exact leave-one-out on a Beta-Binomial model") {
  const int y[3] = {3, 7, 12}, n[3] = {10, 10, 20};
  const double a = 2.0, b = 2.0;
  double ys = 0, fs = 0;
  for (int i = 0; i < 3; ++i) {
    ys += y[i];
    fs += n[i] - y[i];
  }
  double exact = 0.0;
  for (int i = 0; i < 3; ++i) exact += log_beta_binomial(y[i], n[i], a + ys - y[i], b + fs - (n[i] - y[i]));

  std::mt19937_64 rng(17);
  PointwiseLogLik ll;
  ll.values.resize(2000, 3);
  for (Eigen::Index s = 0; s < 2000; ++s) {
    const double theta = beta_draw(rng, a + ys, b + fs);
    for (int i = 0; i < 3; ++i) ll.values(s, i) = log_binomial(y[i], n[i], theta);
  }
  const ElpdReport r = psis_loo(ll);
  CHECK(std::abs(r.elpd_loo - exact) <= 0.3);
  CHECK(r.n_bad_k == 0);
  CHECK(r.warnings.empty());
  CHECK(r.se >= 0.0);
}

TEST_CASE("generalized Pareto fit recovers a known shape") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double k = 0.3, sigma = 2.0;
  std::vector<double> x(20000);
  for (double& v : x) v = sigma * (std::pow(1.0 - u(rng), -k) - 1.0) / k;
  std::sort(x.begin(), x.end());
  const GeneralizedPareto g = fit_generalized_pareto(x);
  CHECK(g.k == doctest::Approx(k).epsilon(0.1));
  CHECK(g.sigma == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("heavy-tailed ratios are flagged") {
  // Importance ratios with a Pareto tail of shape 1.2.
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> lw(4000);
  for (double& v : lw) v = 1.2 * -std::log(1.0 - u(rng));
  CHECK(pareto_smooth(lw) > kParetoKThreshold);
}

TEST_CASE("constant shifts and permutations") {
  PointwiseLogLik ll = random_loglik(500, 6, 3);
  const ElpdReport base = psis_loo(ll);
  PointwiseLogLik shifted = ll;
  shifted.values.col(2).array() += 1.75;
  const ElpdReport s = psis_loo(shifted);
  CHECK(s.pointwise[2] == doctest::Approx(base.pointwise[2] + 1.75).epsilon(1e-12));
  CHECK(s.pointwise[0] == base.pointwise[0]);
  CHECK(s.pareto_k[2] == doctest::Approx(base.pareto_k[2]).epsilon(1e-9));

  PointwiseLogLik reversed = ll;
  reversed.values = ll.values.colwise().reverse();
  const ElpdReport r = psis_loo(reversed);
  CHECK(r.elpd_loo == doctest::Approx(base.elpd_loo).epsilon(1e-12));

  PointwiseLogLik swapped = ll;
  swapped.values.col(0).swap(swapped.values.col(5));
  CHECK(psis_loo(swapped).elpd_loo == doctest::Approx(base.elpd_loo).epsilon(1e-12));
}

TEST_CASE("identical draws give the log-likelihood exactly") {
  PointwiseLogLik ll;
  ll.values = Eigen::MatrixXd::Constant(200, 2, -4.25);
  ll.values.col(1).setConstant(-1.5);
  const ElpdReport r = psis_loo(ll);
  CHECK(r.pointwise[0] == doctest::Approx(-4.25).epsilon(1e-14));
  CHECK(r.pointwise[1] == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(r.n_bad_k == 2);
  CHECK(std::isinf(r.pareto_k[0]));
}

TEST_CASE("few draws produce a warning") {
  CHECK_FALSE(psis_loo(random_loglik(50, 3, 4)).warnings.empty());
}

TEST_CASE("model comparison") {
  const ElpdReport a = psis_loo(random_loglik(400, 8, 5));
  ElpdReport b = a;
  for (std::size_t p = 0; p < b.pointwise.size(); ++p) b.pointwise[p] -= 0.1 * (p + 1);
  b.elpd_loo = a.elpd_loo - 3.6;

  const ModelComparison same = compare_models({{"x", a}, {"y", a}});
  REQUIRE(same.pairs.size() == 1);
  CHECK(same.pairs[0].elpd_diff == 0.0);
  CHECK(same.pairs[0].se_diff == 0.0);

  const ModelComparison c = compare_models({{"worse", b}, {"better", a}});
  CHECK(c.ranking[0].name == "better");
  CHECK(c.ranking[1].elpd_diff == doctest::Approx(-3.6));
  REQUIRE(c.pairs.size() == 1);
  CHECK(c.pairs[0].better == "better");
  CHECK(c.pairs[0].elpd_diff == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(c.pairs[0].se_diff > 0.0);

  ElpdReport short_report = a;
  short_report.pointwise.pop_back();
  CHECK_THROWS_AS(compare_models({{"x", a}, {"y", short_report}}), InvalidInput);
}

TEST_CASE("pointwise log-likelihood entries are negative binomial terms") {
  SyntheticScenario sc;
  sc.regions = 2;
  sc.intervals = 2;
  SyntheticFixture fx;
  AlignedDataset ds = generate_scenario(sc, 6, &fx);
  const ParameterLayout L(ModelVariant::sirva, 1, 1, ds.region_ids());
  ModelParams p = fx.truth;
  p.beta.resize(1);
  p.nu.resize(1);
  const auto v = L.pack(p);
  PosteriorSamples s;
  s.names = L.names();
  s.num_chains = 2;
  s.draws_per_chain = 1;
  s.values.resize(2, static_cast<Eigen::Index>(v.size()));
  for (std::size_t j = 0; j < v.size(); ++j) s.values(0, j) = s.values(1, j) = v[j];

  const PointwiseLogLik ll = pointwise_loglik(s, ds, fx.exposure, sc.spec);
  REQUIRE(ll.points.size() == 16);
  CHECK(ll.values.row(0) == ll.values.row(1));
  for (std::size_t q = 0; q < ll.points.size(); ++q) {
    const PointId& id = ll.points[q];
    const std::size_t i = *ds.find_region(id.region_id);
    const IntervalDeltas mu = predicted_deltas(p, sc.spec, ds, fx.exposure, i, id.interval);
    const IntervalObservation& o = ds.regions[i].observed[id.interval - 1];
    const double m[4] = {mu.cases, mu.vaccinations, mu.recovered, mu.susceptible_outflow};
    const double x[4] = {o.cases, o.vaccinations, o.recovered, o.susceptible_outflow};
    const double phi = p.phi[id.channel];
    boost::math::negative_binomial_distribution<double> d(phi, phi / (m[id.channel] + phi));
    CHECK(ll.values(0, q) == doctest::Approx(std::log(boost::math::pdf(d, x[id.channel]))).epsilon(1e-10));
  }
}
