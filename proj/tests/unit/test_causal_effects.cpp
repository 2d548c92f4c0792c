#include <doctest.h>

#include <cmath>
#include <vector>

#include "hesitancy/causal_effects.hpp"
#include "hesitancy/error.hpp"

using namespace hesitancy;

namespace {

// Grid-level dataset; effects read populations, observed compartments and exposure.
struct Fixture {
  AlignedDataset ds;
  ExposureSeries ex;
};

Fixture fixture(const std::vector<double>& populations, const std::vector<double>& s_fraction, std::size_t intervals,
                double exposure, double infected = 0.0) {
  Fixture f;
  for (std::size_t g = 0; g <= intervals; ++g)
    f.ds.grid_dates.push_back(parse_date("2021-01-01") + std::chrono::days(8 * g));
  f.ex.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(populations.size()),
                                          static_cast<Eigen::Index>(intervals), exposure);
  for (std::size_t i = 0; i < populations.size(); ++i) {
    RegionSeries r;
    r.region_id = "r" + std::to_string(i);
    r.population = populations[i];
    const double s = s_fraction[i] * populations[i];
    r.susceptible.assign(intervals + 1, s);
    r.infected.assign(intervals + 1, infected);
    r.recovered.assign(intervals + 1, 0.0);
    r.vaccinated.assign(intervals + 1, populations[i] - s - infected);
    r.cum_cases.assign(intervals + 1, infected);
    r.observed.resize(intervals);
    f.ds.regions.push_back(r);
    f.ex.region_ids.push_back(r.region_id);
  }
  return f;
}

ModelParams point(std::size_t regions, double alpha0, double gamma_e, double gamma_p = 0.0) {
  ModelParams p;
  p.beta = {0.1, 0.1, 0.1, 0.1};
  p.rho = 0.1;
  p.nu = {0.0025, 0.0025};
  p.gamma_e = gamma_e;
  p.gamma_p = gamma_p;
  p.alpha0.assign(regions, alpha0);
  p.phi = {10, 10, 10, 10};
  return p;
}

PosteriorSamples samples_of(const std::vector<ModelParams>& draws, const AlignedDataset& ds,
                            ModelVariant variant = ModelVariant::sirva) {
  const ParameterLayout L(variant, draws[0].beta.size(), draws[0].nu.size(), ds.region_ids());
  PosteriorSamples s;
  s.names = L.names();
  s.num_chains = 2;
  s.draws_per_chain = draws.size() / 2;
  s.values.resize(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(L.size()));
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto v = L.pack(draws[d]);
    for (std::size_t j = 0; j < v.size(); ++j) s.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = v[j];
  }
  return s;
}

}  // namespace

TEST_CASE("single-term ATE by hand") {
  const Fixture f = fixture({1000}, {0.5}, 1, 0.0);
  const auto s = samples_of({point(1, 0.2, 0.18), point(1, 0.2, 0.18)}, f.ds);
  const EffectReport r = estimate_ate(s, f.ds, f.ex, ModelSpec{});
  REQUIRE(r.ate.has_value());
  CHECK(*r.ate == doctest::Approx(-0.0025 * 0.5 * 0.18 * 0.8).epsilon(1e-14));
  CHECK(*r.ate == doctest::Approx(-1.8e-4).epsilon(1e-14));
  CHECK(r.ate_ci->lower <= *r.ate);
  CHECK(r.ate_ci->upper >= *r.ate);
  CHECK(r.draws_used == 2);
}

TEST_CASE("no conversion means no effect") {
  const Fixture f = fixture({1000, 4000}, {0.5, 0.7}, 6, 0.01);
  const auto s = samples_of({point(2, 0.2, 0.0), point(2, 0.3, 0.0)}, f.ds);
  CHECK(*estimate_ate(s, f.ds, f.ex, ModelSpec{}).ate == 0.0);
  CHECK(prevented_vaccinations(s, f.ds, f.ex, ModelSpec{}, 1e6).delta_v == 0.0);
  CHECK(counterfactual_delta_v(s, f.ds, f.ex, ModelSpec{}, 1e6).delta_v == 0.0);
}

TEST_CASE("estimand is linear in gamma_e when alpha does not depend on it") {
  // Zero exposure keeps the reconstructed alpha free of gamma_e.
  const Fixture f = fixture({1000, 3000}, {0.6, 0.4}, 6, 0.0);
  const auto a = samples_of({point(2, 0.2, 0.1, 0.004), point(2, 0.25, 0.3, 0.002)}, f.ds);
  const auto b = samples_of({point(2, 0.2, 0.25, 0.004), point(2, 0.25, 0.75, 0.002)}, f.ds);
  const EffectReport ra = estimate_ate(a, f.ds, f.ex, ModelSpec{});
  const EffectReport rb = estimate_ate(b, f.ds, f.ex, ModelSpec{});
  CHECK(*rb.ate == doctest::Approx(2.5 * *ra.ate).epsilon(1e-14));
  for (std::size_t d = 0; d < 2; ++d) CHECK(rb.ate_draws[d] == doctest::Approx(2.5 * ra.ate_draws[d]).epsilon(1e-14));
}

TEST_CASE("population weighting") {
  const std::vector<ModelParams> one{point(1, 0.2, 0.18), point(1, 0.2, 0.18)};
  const Fixture f1 = fixture({1000}, {0.5}, 4, 0.01);
  const double base = *estimate_ate(samples_of(one, f1.ds), f1.ds, f1.ex, ModelSpec{}).ate;

  SUBCASE("duplicating a region leaves the ATE unchanged") {
    const Fixture f2 = fixture({1000, 1000}, {0.5, 0.5}, 4, 0.01);
    const double dup = *estimate_ate(samples_of({point(2, 0.2, 0.18), point(2, 0.2, 0.18)}, f2.ds), f2.ds, f2.ex,
                                     ModelSpec{}).ate;
    CHECK(dup == doctest::Approx(base).epsilon(1e-14));
  }
  SUBCASE("doubling a region's population doubles its weight") {
    const Fixture fa = fixture({1000}, {0.8}, 4, 0.01);
    const double other = *estimate_ate(samples_of(one, fa.ds), fa.ds, fa.ex, ModelSpec{}).ate;
    const Fixture f2 = fixture({1000, 2000}, {0.5, 0.8}, 4, 0.01);
    const double mixed = *estimate_ate(samples_of({point(2, 0.2, 0.18), point(2, 0.2, 0.18)}, f2.ds), f2.ds, f2.ex,
                                       ModelSpec{}).ate;
    CHECK(mixed == doctest::Approx((base + 2.0 * other) / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("ATE sign follows gamma_e") {
  const Fixture f = fixture({1000, 3000}, {0.6, 0.4}, 6, 0.005);
  const EffectReport pos = estimate_ate(samples_of({point(2, 0.2, 0.2), point(2, 0.2, 0.1)}, f.ds), f.ds, f.ex, ModelSpec{});
  const EffectReport neg = estimate_ate(samples_of({point(2, 0.2, -0.2), point(2, 0.2, -0.1)}, f.ds), f.ds, f.ex, ModelSpec{});
  CHECK(*pos.ate < 0.0);
  CHECK(*neg.ate > 0.0);
  CHECK(pos.tail_p == doctest::Approx(1.0 / 3.0));
  CHECK(neg.tail_p == 1.0);
}

TEST_CASE("prevented vaccinations under constant exposure") {
  const double e = 0.004, n_total = 3.37e8, days = 192;
  const Fixture f = fixture({1000, 5000}, {0.6, 0.4}, 6, e);
  const auto s = samples_of({point(2, 0.2, 0.18, 0.001), point(2, 0.3, 0.2)}, f.ds);
  const EffectReport r = prevented_vaccinations(s, f.ds, f.ex, ModelSpec{}, n_total, days);
  const EffectReport a = estimate_ate(s, f.ds, f.ex, ModelSpec{});
  CHECK(r.delta_v == doctest::Approx(n_total * days * e * std::abs(*a.ate)).epsilon(1e-13));
  CHECK(r.delta_v > 0.0);
  // Default period: the observed span.
  const EffectReport span = prevented_vaccinations(s, f.ds, f.ex, ModelSpec{}, n_total);
  CHECK(span.period_days == 48.0);

  const Fixture z = fixture({1000, 5000}, {0.6, 0.4}, 6, 0.0);
  CHECK(prevented_vaccinations(s, z.ds, z.ex, ModelSpec{}, n_total, days).delta_v == 0.0);
}

TEST_CASE("counterfactual against a direct simulation") {
  // No infections, constant exposure e: daily Euler updates of S, V and alpha
  // with and without exposure, written out directly.
  const double e = 0.002, n = 1e5, s0 = 6e4, a0 = 0.2, ge = 0.18, nu = 0.0025;
  const std::size_t intervals = 6;
  const Fixture f = fixture({n}, {s0 / n}, intervals, e);
  ModelParams p = point(1, a0, ge);
  p.beta = {0.1, 0.1};
  p.nu = {nu};
  const auto s = samples_of({p, p}, f.ds);

  auto final_v = [&](double exposure) {
    double S = s0, V = 0.0, a = a0;
    for (std::size_t d = 0; d < intervals * 8; ++d) {
      const double vac = nu * S * (1.0 - a);
      S -= vac;
      V += vac;
      a += ge * exposure * (1.0 - a);
    }
    return V;
  };
  const double expect = final_v(0.0) - final_v(e);
  const EffectReport r = counterfactual_delta_v(s, f.ds, f.ex, ModelSpec{}, 2.0 * n);
  CHECK(r.delta_v == doctest::Approx(2.0 * expect).epsilon(1e-10));
  CHECK(r.delta_v > 0.0);
  CHECK(r.draws_excluded == 0);
  // Continuous-time small-effect limit with S(t) = s0 exp(-k t), k = nu (1 - alpha0):
  // nu s0 gamma_e e (1 - alpha0) * integral of t exp(-k t) over [0, T].
  const double T = 48.0, k = nu * (1 - a0);
  const double integral = (1.0 - std::exp(-k * T) * (1.0 + k * T)) / (k * k);
  CHECK(expect == doctest::Approx(nu * s0 * ge * e * (1 - a0) * integral).epsilon(0.1));
}

TEST_CASE("fully hesitant regions cannot be converted") {
  const Fixture f = fixture({1000, 2000}, {0.5, 0.6}, 6, 0.02, 5.0);
  const auto s = samples_of({point(2, 1.0, 0.18), point(2, 1.0, 0.3)}, f.ds);
  CHECK(counterfactual_delta_v(s, f.ds, f.ex, ModelSpec{}, 3000).delta_v == 0.0);
  CHECK(*estimate_ate(s, f.ds, f.ex, ModelSpec{}).ate == 0.0);
}

TEST_CASE("effects need dynamic hesitancy and matching regions") {
  const Fixture f = fixture({1000}, {0.5}, 3, 0.01);
  ModelParams p = point(1, 0.2, 0.18);
  p.alpha0.clear();
  const auto sirv = samples_of({p, p}, f.ds, ModelVariant::sirv);
  CHECK_THROWS_AS(estimate_ate(sirv, f.ds, f.ex, ModelSpec{}), InvalidInput);
  const Fixture g = fixture({1000, 2000}, {0.5, 0.5}, 3, 0.01);
  const auto s = samples_of({point(1, 0.2, 0.1), point(1, 0.2, 0.1)}, f.ds);
  CHECK_THROWS_AS(estimate_ate(s, g.ds, g.ex, ModelSpec{}), InvalidInput);
  CHECK_THROWS_AS(prevented_vaccinations(s, f.ds, f.ex, ModelSpec{}, 0.0), InvalidInput);
}

TEST_CASE("shuffle null test reads the gamma_e interval") {
  const Fixture f = fixture({1000}, {0.5}, 1, 0.0);
  std::vector<ModelParams> around_zero, positive;
  for (int d = 0; d < 40; ++d) {
    around_zero.push_back(point(1, 0.2, (d - 19.5) / 100.0));
    positive.push_back(point(1, 0.2, 0.1 + d / 1000.0));
  }
  const ShuffleNullResult a = shuffle_null_test(samples_of(around_zero, f.ds));
  CHECK(a.passes);
  CHECK(a.tail_p == doctest::Approx(0.5));
  const ShuffleNullResult b = shuffle_null_test(samples_of(positive, f.ds));
  CHECK_FALSE(b.passes);
  CHECK(b.tail_p == doctest::Approx(1.0 / 41.0));
}
