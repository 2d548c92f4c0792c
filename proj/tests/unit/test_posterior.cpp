#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "hesitancy/error.hpp"
#include "hesitancy/posterior.hpp"
#include "hesitancy/synthetic.hpp"

using namespace hesitancy;

namespace {

double nb_log_pmf(double x, double mu, double phi) {
  boost::math::negative_binomial_distribution<double> d(phi, phi / (mu + phi));
  return std::log(boost::math::pdf(d, x));
}

// Term-by-term likelihood written directly from the model equations: for each
// observed interval, 8 daily Euler steps from the observed state, alpha carried
// forward from alpha0 through every interval.
double brute_force_log_likelihood(const ModelParams& p, const ModelSpec& spec, const AlignedDataset& ds,
                                  const ExposureSeries& ex) {
  const double dt = spec.dt_days();
  double total = 0.0;
  for (std::size_t i = 0; i < ds.num_regions(); ++i) {
    const RegionSeries& r = ds.regions[i];
    double alpha = has_alpha(spec.variant) ? p.alpha0[i] : 0.0;
    for (std::size_t k = 0; k < ds.num_intervals(); ++k) {
      const double e = ex.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      const double beta = p.beta[k / spec.beta_period_intervals];
      const double nu = p.nu[k / spec.nu_period_intervals];
      double S = r.susceptible[k], I = r.infected[k];
      double c = 0.0, v = 0.0, rec = 0.0;
      for (int m = 0; m < spec.substeps; ++m) {
        const double inf = beta * I * S / r.population * dt;
        const double vac = nu * S * (1.0 - alpha) * dt;
        const double rr = p.rho * I * dt;
        S -= inf + vac;
        I += inf - rr;
        c += inf;
        v += vac;
        rec += rr;
        if (has_dynamic_alpha(spec.variant)) alpha += (p.gamma_p + p.gamma_e * e) * (1.0 - alpha) * dt;
      }
      if (k < ds.first_observed) continue;
      const IntervalObservation& o = r.observed[k];
      const double mu[4] = {c, v, rec, c + v};
      const double x[4] = {o.cases, o.vaccinations, o.recovered, o.susceptible_outflow};
      for (int j = 0; j < 4; ++j) total += nb_log_pmf(x[j], std::max(mu[j], kMuFloor), p.phi[j]);
    }
  }
  return total;
}

SyntheticScenario small_scenario(std::size_t regions, std::size_t intervals) {
  SyntheticScenario sc;
  sc.regions = regions;
  sc.intervals = intervals;
  return sc;
}

AlignedDataset with_lag(AlignedDataset ds, std::size_t first_observed) {
  ds.first_observed = first_observed;
  return ds;
}

ModelParams truth_for(const SyntheticFixture& fx, const LogPosterior& post) {
  ModelParams p = fx.truth;
  p.beta.resize(post.layout().n_beta, p.beta.back());
  p.nu.resize(post.layout().n_nu, p.nu.back());
  return p;
}

}  // namespace

TEST_CASE("likelihood matches a term-by-term brute-force evaluation") {
  for (ModelVariant v : {ModelVariant::sirva, ModelVariant::sirv, ModelVariant::sirva_static}) {
    SyntheticScenario sc = small_scenario(2, 3);
    sc.spec.variant = v;
    SyntheticFixture fx;
    for (std::size_t first : {0, 1}) {
      const AlignedDataset ds = with_lag(generate_scenario(sc, 4, &fx), first);
      const LogPosterior post(ds, fx.exposure, sc.spec, PriorSpec{});
      const ModelParams p = truth_for(fx, post);
      CHECK(post.num_points() == 4 * 2 * (3 - first));
      CHECK(post.log_likelihood(p) ==
            doctest::Approx(brute_force_log_likelihood(p, sc.spec, ds, fx.exposure)).epsilon(1e-10));
      CHECK(log_likelihood(p, sc.spec, ds, fx.exposure) == doctest::Approx(post.log_likelihood(p)));
    }
  }
}

TEST_CASE("all-zero observations with floored means") {
  // One region with nobody left to infect or vaccinate: every mean sits at the floor.
  AlignedDataset ds;
  ds.grid_dates = {parse_date("2021-01-01"), parse_date("2021-01-09")};
  RegionSeries r;
  r.region_id = "z";
  r.population = 1000;
  r.cum_cases = {0, 0};
  r.cum_deaths = {0, 0};
  r.vaccinated = {1000, 1000};
  r.recovered = {0, 0};
  r.infected = {0, 0};
  r.susceptible = {0, 0};
  r.observed.resize(1);
  ds.regions.push_back(r);
  ExposureSeries ex;
  ex.region_ids = {"z"};
  ex.values = Eigen::MatrixXd::Zero(1, 1);
  ModelParams p = SyntheticScenario::default_params();
  p.alpha0 = {0.2};
  p.phi = {0.5, 2.0, 7.0, 30.0};
  double expect = 0.0;
  for (double phi : p.phi) expect += phi * std::log(phi / (kMuFloor + phi));
  CHECK(log_likelihood(p, ModelSpec{}, ds, ex) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("likelihood is additive over regions") {
  SyntheticFixture fx;
  const SyntheticScenario sc = small_scenario(1, 6);
  const AlignedDataset one = generate_scenario(sc, 8, &fx);
  AlignedDataset two = one;
  two.regions.push_back(one.regions[0]);
  two.regions[1].region_id = "copy";
  ExposureSeries ex2 = fx.exposure;
  ex2.region_ids.push_back("copy");
  ex2.values.conservativeResize(2, Eigen::NoChange);
  ex2.values.row(1) = fx.exposure.values.row(0);
  ModelParams p = fx.truth;
  const double single = log_likelihood(p, sc.spec, one, fx.exposure);
  p.alpha0.push_back(p.alpha0[0]);
  CHECK(log_likelihood(p, sc.spec, two, ex2) == doctest::Approx(2.0 * single).epsilon(1e-13));
}

TEST_CASE("predicted deltas from the observed state") {
  SyntheticFixture fx;
  SyntheticScenario sc = small_scenario(3, 4);
  sc.spec.variant = ModelVariant::sirva;
  AlignedDataset ds = generate_scenario(sc, 12, &fx);
  ModelParams p = fx.truth;

  SUBCASE("no hesitancy: vaccinations follow exponential decay of S") {
    p.alpha0.assign(3, 0.0);
    p.gamma_e = p.gamma_p = 0.0;
    ds.regions[1].infected[2] = 0.0;
    const IntervalDeltas d = predicted_deltas(p, sc.spec, ds, fx.exposure, 1, 3);
    const double S = ds.regions[1].susceptible[2];
    const double nu = p.nu[0];
    // Daily Euler steps give S (1 - (1 - nu)^8), within O(nu) of the exact decay.
    CHECK(d.vaccinations == doctest::Approx(S * (1.0 - std::pow(1.0 - nu, 8))).epsilon(1e-12));
    CHECK(d.vaccinations == doctest::Approx(S * (1.0 - std::exp(-nu * 8.0))).epsilon(nu));
    CHECK(d.vaccinations == doctest::Approx(nu * S * 8.0).epsilon(8.0 * nu));
  }
  SUBCASE("no infected: case mean at the floor") {
    ds.regions[0].infected[1] = 0.0;
    const IntervalDeltas d = predicted_deltas(p, sc.spec, ds, fx.exposure, 0, 2);
    CHECK(d.cases == kMuFloor);
    CHECK(d.recovered == kMuFloor);
  }
  SUBCASE("susceptible outflow is infections plus vaccinations") {
    for (std::size_t t = 1; t <= 4; ++t) {
      const IntervalDeltas d = predicted_deltas(p, sc.spec, ds, fx.exposure, 2, t);
      CHECK(d.susceptible_outflow == doctest::Approx(d.cases + d.vaccinations).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(predicted_deltas(p, sc.spec, ds, fx.exposure, 0, 0), InvalidInput);
}

TEST_CASE("layout packs, unpacks and names parameters") {
  const ParameterLayout L(ModelVariant::sirva_wom, 2, 1, {"a", "b"});
  CHECK(L.size() == 2 + 1 + 1 + 3 + 2 + 4);
  const auto names = L.names();
  CHECK(names.front() == "beta[0]");
  const ParameterLayout back = ParameterLayout::from_names(names);
  CHECK(back.variant == ModelVariant::sirva_wom);
  CHECK(back.region_ids == L.region_ids);
  ModelParams p;
  p.beta = {0.1, 0.2};
  p.nu = {0.003};
  p.gamma_e = 0.18;
  p.gamma_p = -0.01;
  p.gamma_a = 0.05;
  p.alpha0 = {0.3, 0.4};
  p.phi = {1, 2, 3, 4};
  const ModelParams q = L.unpack(L.pack(p));
  CHECK(q.beta == p.beta);
  CHECK(q.gamma_a == p.gamma_a);
  CHECK(q.alpha0 == p.alpha0);
  CHECK(q.phi == p.phi);
  const ParameterLayout sirv(ModelVariant::sirv, 1, 1, {"a"});
  for (const auto& n : sirv.names()) CHECK(n.find("gamma") == std::string::npos);
}

TEST_CASE("log density includes priors and transform Jacobians") {
  SyntheticFixture fx;
  const SyntheticScenario sc = small_scenario(2, 6);
  const AlignedDataset ds = generate_scenario(sc, 21, &fx);
  const PriorSpec pr;
  const LogPosterior post(ds, fx.exposure, sc.spec, pr);
  const ModelParams p = truth_for(fx, post);
  const auto theta_v = post.layout().pack(p);
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(theta_v.data(), theta_v.size());
  const Eigen::VectorXd u = post.unconstrain(theta);
  CHECK(post.constrain(u).isApprox(theta, 1e-12));

  double expect = brute_force_log_likelihood(p, sc.spec, ds, fx.exposure) + log_prior(p, pr, sc.spec.variant);
  const auto& L = post.layout();
  for (std::size_t i = 0; i < L.size(); ++i) {
    const PriorTerm& t = L.prior_for(i, pr);
    if (std::isfinite(t.lower) && std::isfinite(t.upper)) {
      const double f = (theta[i] - t.lower) / (t.upper - t.lower);
      expect += std::log(t.upper - t.lower) + std::log(f) + std::log1p(-f);
    } else if (std::isfinite(t.lower)) {
      expect += std::log(theta[i] - t.lower);
    }
  }
  CHECK(post.log_density(u) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("gradient matches finite differences at random points") {
  for (ModelVariant v : {ModelVariant::sirva, ModelVariant::sirva_wom, ModelVariant::sirv}) {
    SyntheticFixture fx;
    SyntheticScenario sc = small_scenario(3, 8);
    sc.spec.variant = ModelVariant::sirva;
    const AlignedDataset ds = with_lag(generate_scenario(sc, 31, &fx), 1);
    ModelSpec spec = sc.spec;
    spec.variant = v;
    const LogPosterior post(ds, fx.exposure, spec, PriorSpec{});
    const auto truth = post.layout().pack(truth_for(fx, post));
    const Eigen::VectorXd u0 =
        post.unconstrain(Eigen::Map<const Eigen::VectorXd>(truth.data(), static_cast<Eigen::Index>(truth.size())));
    // The density has kinks where a mean reaches its floor (e.g. gamma_p large
    // enough to make everyone hesitant), so points stay in the smooth region:
    // wide noise on the log/logit scale, plausible ranges for the gammas.
    const auto& L = post.layout();
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int point = 0; point < 7; ++point) {
      Eigen::VectorXd u = u0;
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] += 0.3 * z(rng);
      if (L.has_gamma()) {
        u[L.gamma_e_index()] = u0[L.gamma_e_index()] + 0.1 * z(rng);
        u[L.gamma_p_index()] = u0[L.gamma_p_index()] + 0.005 * z(rng);
      }
      if (L.has_gamma_a()) u[L.gamma_a_index()] = 0.05 * z(rng);
      Eigen::VectorXd g, scratch;
      const double f0 = post.log_density_gradient(u, g);
      REQUIRE(std::isfinite(f0));
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        // Richardson-extrapolated central difference.
        auto central = [&](double h) {
          Eigen::VectorXd a = u, b = u;
          a[i] += h;
          b[i] -= h;
          return (post.log_density(a) - post.log_density(b)) / (2.0 * h);
        };
        const double h = 1e-5 * std::max(1.0, std::abs(u[i]));
        const double fd = (4.0 * central(h / 2) - central(h)) / 3.0;
        CHECK(std::abs(g[i] - fd) <= 1e-5 * std::max(std::abs(fd), 1.0));
      }
    }
  }
}

TEST_CASE("alpha reconstruction integrates the hesitancy equation") {
  ModelParams p = SyntheticScenario::default_params();
  p.alpha0 = {0.3};
  p.gamma_p = 0.0;
  ModelSpec spec;
  const std::vector<double> e{0.01, 0.0, 0.02};
  const auto a = reconstruct_alpha(p, spec, 0, e, 3);
  REQUIRE(a.size() == 4);
  CHECK(a[0] == 0.3);
  // Euler: 1 - alpha shrinks by (1 - gamma dt) per day.
  CHECK(1.0 - a[1] == doctest::Approx(0.7 * std::pow(1.0 - 0.18 * 0.01, 8)).epsilon(1e-14));
  CHECK(a[2] == a[1]);
  CHECK(1.0 - a[3] == doctest::Approx((1.0 - a[2]) * std::pow(1.0 - 0.18 * 0.02, 8)).epsilon(1e-14));
}
