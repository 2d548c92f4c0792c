#include "hesitancy/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hesitancy/error.hpp"
#include "hesitancy/posterior.hpp"

namespace hesitancy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double gpd_quantile(double p, const GeneralizedPareto& g) {
  if (std::abs(g.k) < 1e-12) return -g.sigma * std::log1p(-p);
  return g.sigma * std::expm1(-g.k * std::log1p(-p)) / g.k;
}

void normalize(std::vector<double>& lw) {
  const double z = log_sum_exp(lw);
  for (double& v : lw) v -= z;
}

}  // namespace

PointwiseLogLik pointwise_loglik(const PosteriorSamples& samples, const AlignedDataset& dataset,
                                 const ExposureSeries& exposure, const ModelSpec& spec_in) {
  ModelSpec spec = spec_in;
  spec.variant = samples.layout().variant;
  const LogPosterior post(dataset, exposure, spec, PriorSpec{});
  PointwiseLogLik out;
  for (const auto& r : dataset.regions)
    for (std::size_t t = dataset.first_observed + 1; t <= dataset.num_intervals(); ++t)
      for (int j = 0; j < 4; ++j) out.points.push_back({r.region_id, t, static_cast<Channel>(j)});
  out.values.resize(static_cast<Eigen::Index>(samples.num_draws()), static_cast<Eigen::Index>(out.points.size()));
  for (std::size_t s = 0; s < samples.num_draws(); ++s) {
    const auto ll = post.pointwise_log_likelihood(samples.params(s));
    if (ll.size() != out.points.size()) throw InvalidInput("posterior does not match the dataset");
    for (std::size_t p = 0; p < ll.size(); ++p) {
      if (!std::isfinite(ll[p])) {
        const auto& id = out.points[p];
        throw NumericalError("non-finite log likelihood at region " + id.region_id + ", interval " +
                             std::to_string(id.interval) + ", channel " + std::string(kChannelNames[id.channel]));
      }
      out.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p)) = ll[p];
    }
  }
  return out;
}

GeneralizedPareto fit_generalized_pareto(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw NumericalError("Pareto fit needs at least two points");
  const double xmax = x.back();
  const double xstar = x[static_cast<std::size_t>(std::floor(static_cast<double>(n) / 4.0 + 0.5)) - 1];
  if (!(xmax > 0.0) || !(xstar > 0.0)) throw NumericalError("degenerate Pareto tail");
  constexpr double prior = 3.0;
  const std::size_t m = 30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  std::vector<double> theta(m), l_theta(m);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) {
    theta[j] = 1.0 / xmax + (1.0 - std::sqrt(static_cast<double>(m) / (static_cast<double>(j + 1) - 0.5))) / prior / xstar;
    double k = 0.0;
    for (double xi : x) k += std::log1p(-theta[j] * xi);
    k /= dn;
    l_theta[j] = dn * (std::log(-theta[j] / k) - k - 1.0);
  }
  const double z = log_sum_exp(l_theta);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double w = std::exp(l_theta[j] - z);
    if (std::isfinite(w)) theta_hat += theta[j] * w;
  }
  double k = 0.0;
  for (double xi : x) k += std::log1p(-theta_hat * xi);
  k /= dn;
  const double sigma = -k / theta_hat;
  // Shrink toward 0.5, as for a prior worth 10 observations.
  k = (k * dn + 10.0 * 0.5) / (dn + 10.0);
  if (!std::isfinite(k) || !(sigma > 0.0)) throw NumericalError("Pareto fit did not converge");
  return {k, sigma};
}

double pareto_smooth(std::vector<double>& lw) {
  const std::size_t s = lw.size();
  if (s < 5) throw InvalidInput("Pareto smoothing needs at least 5 draws");
  const double max_lw = *std::max_element(lw.begin(), lw.end());
  for (double& v : lw) v -= max_lw;

  const std::size_t tail = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(s)));
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lw[a] < lw[b]; });
  const double cutoff = lw[order[s - tail - 1]];
  const double exp_cutoff = std::exp(cutoff);

  double k = kInf;
  try {
    std::vector<double> x(tail);
    for (std::size_t i = 0; i < tail; ++i) x[i] = std::exp(lw[order[s - tail + i]]) - exp_cutoff;
    const auto g = fit_generalized_pareto(x);
    k = g.k;
    for (std::size_t i = 0; i < tail; ++i) {
      const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(tail);
      // Smoothed weights never exceed the largest raw weight (0 after shifting).
      lw[order[s - tail + i]] = std::min(0.0, std::log(gpd_quantile(p, g) + exp_cutoff));
    }
  } catch (const NumericalError&) {
    // Raw ratios are kept; k stays +inf to flag the point.
  }
  normalize(lw);
  const double cap = 0.75 * std::log(static_cast<double>(s)) - std::log(static_cast<double>(s));
  for (double& v : lw) v = std::min(v, cap);
  normalize(lw);
  return k;
}

ElpdReport psis_loo(const PointwiseLogLik& loglik) {
  const auto n_draws = static_cast<std::size_t>(loglik.values.rows());
  const auto n_points = static_cast<std::size_t>(loglik.values.cols());
  if (n_points == 0) throw InvalidInput("no data points for LOO");
  if (!loglik.points.empty() && loglik.points.size() != n_points)
    throw InvalidInput("point identities do not match the log-likelihood columns");
  ElpdReport rep;
  if (n_draws < 100)
    rep.warnings.push_back("fewer than 100 draws (" + std::to_string(n_draws) + "); PSIS-LOO may be unreliable");
  rep.points = loglik.points;
  rep.pointwise.resize(n_points);
  rep.pareto_k.resize(n_points);
  std::vector<double> lw(n_draws), terms(n_draws);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t s = 0; s < n_draws; ++s) lw[s] = -loglik.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p));
    rep.pareto_k[p] = pareto_smooth(lw);
    for (std::size_t s = 0; s < n_draws; ++s)
      terms[s] = lw[s] + loglik.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p));
    // Weights are normalized, so the denominator is 1.
    rep.pointwise[p] = log_sum_exp(terms);
    if (!(rep.pareto_k[p] <= kParetoKThreshold)) ++rep.n_bad_k;
  }
  rep.elpd_loo = std::accumulate(rep.pointwise.begin(), rep.pointwise.end(), 0.0);
  rep.se = std::sqrt(static_cast<double>(n_points) * sample_variance(rep.pointwise));
  if (rep.n_bad_k > 0)
    rep.warnings.push_back(std::to_string(rep.n_bad_k) + " points with Pareto k above 0.7");
  return rep;
}

ModelComparison compare_models(const std::vector<NamedElpd>& reports) {
  if (reports.empty()) throw InvalidInput("no models to compare");
  const std::size_t n = reports.front().report.pointwise.size();
  for (const auto& r : reports) {
    if (r.report.pointwise.size() != n) throw InvalidInput("model '" + r.name + "' covers a different number of points");
    if (!r.report.points.empty() && !reports.front().report.points.empty() &&
        r.report.points != reports.front().report.points)
      throw InvalidInput("model '" + r.name + "' covers different data points");
  }
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return reports[a].report.elpd_loo > reports[b].report.elpd_loo;
  });
  auto diff_stats = [&](std::size_t a, std::size_t b) {
    std::vector<double> d(n);
    for (std::size_t p = 0; p < n; ++p) d[p] = reports[a].report.pointwise[p] - reports[b].report.pointwise[p];
    return std::pair{std::accumulate(d.begin(), d.end(), 0.0), std::sqrt(static_cast<double>(n) * sample_variance(d))};
  };
  ModelComparison cmp;
  for (std::size_t idx : order) {
    const auto [diff, se] = diff_stats(idx, order.front());
    cmp.ranking.push_back({reports[idx].name, reports[idx].report.elpd_loo, reports[idx].report.se, diff, se});
  }
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const auto [diff, se] = diff_stats(order[a], order[b]);
      cmp.pairs.push_back({reports[order[a]].name, reports[order[b]].name, diff, se});
    }
  return cmp;
}

}  // namespace hesitancy
