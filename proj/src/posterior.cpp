#include "hesitancy/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesitancy/dual.hpp"
#include "hesitancy/error.hpp"
#include "hesitancy/negbin.hpp"

namespace hesitancy {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
using DA = Dual<4>;
enum AlphaTangent { kTanGammaE = 0, kTanGammaP, kTanGammaA, kTanAlpha0 };

struct Tape {
  double S, I;
  DA alpha;
  double inf0, vac0;
  bool clamp_s, clamp_r;
};

enum class Transform { identity, log, logit };

Transform transform_of(const PriorTerm& p) {
  const bool lo = std::isfinite(p.lower);
  const bool hi = std::isfinite(p.upper);
  if (lo && hi) return Transform::logit;
  if (lo) return Transform::log;
  if (hi) throw InvalidInput("upper-bounded-only priors are not supported");
  return Transform::identity;
}

double sigmoid(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

}  // namespace

ParameterLayout::ParameterLayout(ModelVariant v, std::size_t nb, std::size_t nn,
                                 std::vector<std::string> ids)
    : variant(v), n_beta(nb), n_nu(nn), region_ids(std::move(ids)) {
  if (n_beta == 0 || n_nu == 0) throw InvalidInput("layout needs at least one beta and one nu period");
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t k = 0; k < n_beta; ++k) out.push_back("beta[" + std::to_string(k) + "]");
  out.push_back("rho");
  for (std::size_t k = 0; k < n_nu; ++k) out.push_back("nu[" + std::to_string(k) + "]");
  if (has_gamma()) {
    out.push_back("gamma_e");
    out.push_back("gamma_p");
  }
  if (has_gamma_a()) out.push_back("gamma_a");
  if (has_alpha0())
    for (const auto& id : region_ids) out.push_back("alpha0[" + id + "]");
  for (auto c : kChannelNames) out.push_back("phi_" + std::string(c));
  return out;
}

ParameterLayout ParameterLayout::from_names(std::span<const std::string> names) {
  std::size_t nb = 0, nn = 0;
  bool gamma = false, gamma_a = false, alpha = false;
  std::vector<std::string> ids;
  for (const auto& n : names) {
    if (n.starts_with("beta[")) ++nb;
    else if (n.starts_with("nu[")) ++nn;
    else if (n == "gamma_e") gamma = true;
    else if (n == "gamma_a") gamma_a = true;
    else if (n.starts_with("alpha0[") && n.ends_with("]")) {
      alpha = true;
      ids.push_back(n.substr(7, n.size() - 8));
    }
  }
  ModelVariant v = ModelVariant::sirv;
  if (gamma_a) v = ModelVariant::sirva_wom;
  else if (gamma) v = ModelVariant::sirva;
  else if (alpha) v = ModelVariant::sirva_static;
  ParameterLayout layout(v, nb, nn, std::move(ids));
  const auto expected = layout.names();
  if (!std::equal(expected.begin(), expected.end(), names.begin(), names.end()))
    throw InvalidInput("parameter names do not form a recognised layout");
  return layout;
}

ModelParams ParameterLayout::unpack(std::span<const double> theta) const {
  if (theta.size() != size()) throw InvalidInput("parameter vector has the wrong length");
  ModelParams p;
  p.beta.assign(theta.begin(), theta.begin() + n_beta);
  p.rho = theta[rho_index()];
  p.nu.assign(theta.begin() + nu_offset(), theta.begin() + nu_offset() + n_nu);
  if (has_gamma()) {
    p.gamma_e = theta[gamma_e_index()];
    p.gamma_p = theta[gamma_p_index()];
  }
  if (has_gamma_a()) p.gamma_a = theta[gamma_a_index()];
  if (has_alpha0())
    p.alpha0.assign(theta.begin() + alpha0_offset(), theta.begin() + alpha0_offset() + n_regions());
  for (int j = 0; j < 4; ++j) p.phi[j] = theta[phi_offset() + j];
  return p;
}

std::vector<double> ParameterLayout::pack(const ModelParams& p) const {
  if (p.beta.size() != n_beta || p.nu.size() != n_nu)
    throw InvalidInput("parameter periods do not match the layout");
  if (has_alpha0() && p.alpha0.size() != n_regions())
    throw InvalidInput("alpha0 count does not match the layout");
  std::vector<double> theta(size());
  std::copy(p.beta.begin(), p.beta.end(), theta.begin());
  theta[rho_index()] = p.rho;
  std::copy(p.nu.begin(), p.nu.end(), theta.begin() + nu_offset());
  if (has_gamma()) {
    theta[gamma_e_index()] = p.gamma_e;
    theta[gamma_p_index()] = p.gamma_p;
  }
  if (has_gamma_a()) theta[gamma_a_index()] = p.gamma_a;
  if (has_alpha0()) std::copy(p.alpha0.begin(), p.alpha0.end(), theta.begin() + alpha0_offset());
  for (int j = 0; j < 4; ++j) theta[phi_offset() + j] = p.phi[j];
  return theta;
}

const PriorTerm& ParameterLayout::prior_for(std::size_t i, const PriorSpec& pr) const {
  if (i < nu_offset()) return i == rho_index() ? pr.rho : pr.beta;
  if (i < gamma_e_index()) return pr.nu;
  if (i >= phi_offset()) return pr.phi;
  if (has_alpha0() && i >= alpha0_offset()) return pr.alpha0;
  if (has_gamma_a() && i == gamma_a_index()) return pr.gamma_a;
  return i == gamma_e_index() ? pr.gamma_e : pr.gamma_p;
}

std::size_t beta_periods_for(const ModelSpec& spec, const AlignedDataset& ds) {
  return std::max<std::size_t>(1, spec.beta_periods(ds.num_intervals()));
}
std::size_t nu_periods_for(const ModelSpec& spec, const AlignedDataset& ds) {
  return std::max<std::size_t>(1, spec.nu_periods(ds.num_intervals()));
}

LogPosterior::LogPosterior(const AlignedDataset& ds, const ExposureSeries& exposure,
                           const ModelSpec& spec, const PriorSpec& priors)
    : spec_(spec),
      priors_(priors),
      layout_(spec.variant, beta_periods_for(spec, ds), nu_periods_for(spec, ds), ds.region_ids()) {
  spec_.validate();
  priors_.validate();
  if (spec_.interval_days != ds.interval_days)
    throw InvalidInput("model interval_days differs from the dataset's");
  if (ds.num_regions() > 0) check_aligned(ds, exposure);
  n_intervals_ = ds.num_intervals();
  first_observed_ = std::min(ds.first_observed, n_intervals_);
  n_obs_intervals_ = n_intervals_ - first_observed_;
  for (std::size_t i = 0; i < ds.num_regions(); ++i) {
    const auto& r = ds.regions[i];
    Region reg;
    reg.N = r.population;
    reg.exposure.resize(n_intervals_);
    for (std::size_t k = 0; k < n_intervals_; ++k)
      reg.exposure[k] = exposure.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    for (std::size_t k = first_observed_; k < n_intervals_; ++k) {
      const auto& o = r.observed[k];
      Point p;
      p.x[kCases] = o.cases;
      p.x[kVaccinations] = o.vaccinations;
      p.x[kRecovered] = o.recovered;
      p.x[kSusceptible] = o.susceptible_outflow;
      for (int j = 0; j < 4; ++j) {
        if (!(p.x[j] >= 0.0)) throw InvalidInput("negative observed increment in region " + r.region_id);
        p.lgx1[j] = std::lgamma(p.x[j] + 1.0);
      }
      p.S = r.susceptible[k];
      p.I = r.infected[k];
      p.R = r.recovered[k];
      p.V = r.vaccinated[k];
      reg.points.push_back(p);
    }
    regions_.push_back(std::move(reg));
  }
}

double LogPosterior::value_and_grad(std::span<const double> theta, double* grad) const {
  const auto& L = layout_;
  const NegBinChannel ch[4] = {NegBinChannel(theta[L.phi_offset()]), NegBinChannel(theta[L.phi_offset() + 1]),
                               NegBinChannel(theta[L.phi_offset() + 2]), NegBinChannel(theta[L.phi_offset() + 3])};
  double d_phi[4] = {0, 0, 0, 0};
  double ll = 0.0;
  const int M = spec_.substeps;
  const double dt = spec_.dt_days();
  const bool dynamic = has_dynamic_alpha(spec_.variant);

  // Hesitancy tangents are carried forward; the compartment chain of each
  // interval is differentiated in reverse from a per-substep tape.
  const DA gamma_e = L.has_gamma() ? DA::variable(theta[L.gamma_e_index()], kTanGammaE) : DA(0.0);
  const DA gamma_p = L.has_gamma() ? DA::variable(theta[L.gamma_p_index()], kTanGammaP) : DA(0.0);
  const DA gamma_a = L.has_gamma_a() ? DA::variable(theta[L.gamma_a_index()], kTanGammaA) : DA(0.0);
  const kernel::RatesT<DA> alpha_rates{DA(0.0), DA(0.0), DA(0.0), gamma_e, gamma_p, gamma_a};
  std::vector<Tape> tape(static_cast<std::size_t>(M));

  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Region& reg = regions_[i];
    const double c1 = dt / reg.N;
    DA alpha(0.0);
    if (L.has_alpha0()) alpha = DA::variable(theta[L.alpha0_offset() + i], kTanAlpha0);

    for (std::size_t k = 0; k < n_intervals_; ++k) {
      const double e = reg.exposure[k];
      if (k < first_observed_) {
        alpha = kernel::advance_alpha(alpha, alpha_rates, e, spec_);
        continue;
      }
      const std::size_t b = k / spec_.beta_period_intervals;
      const std::size_t n = k / spec_.nu_period_intervals;
      const double beta = theta[L.beta_offset() + b];
      const double rho = theta[L.rho_index()];
      const double nu = theta[L.nu_offset() + n];
      const Point& p = reg.points[k - first_observed_];

      double S = p.S, I = p.I;
      double mu[4] = {0, 0, 0, 0};
      for (int m = 0; m < M; ++m) {
        Tape& t = tape[static_cast<std::size_t>(m)];
        t.S = S;
        t.I = I;
        t.alpha = alpha;
        t.inf0 = beta * I * S * c1;
        t.vac0 = nu * S * (1.0 - alpha.v) * dt;
        t.clamp_s = t.inf0 + t.vac0 > S;
        double inf = t.inf0, vac = t.vac0;
        if (t.clamp_s) {
          inf = S * (t.inf0 / (t.inf0 + t.vac0));
          vac = S - inf;
        }
        double rec = rho * I * dt;
        t.clamp_r = rec > I;
        if (t.clamp_r) rec = I;
        S = (S - inf) - vac;
        I = I + inf - rec;
        mu[kCases] += inf;
        mu[kVaccinations] += vac;
        mu[kRecovered] += rec;
        if (dynamic) {
          DA g = gamma_p + gamma_e * e;
          if (L.has_gamma_a()) g += gamma_a * alpha;
          alpha = kernel::clamp01(alpha + g * (1.0 - alpha) * dt);
        }
      }
      mu[kSusceptible] = p.S - S;

      double w[4];
      for (int j = 0; j < 4; ++j) {
        if (!std::isfinite(mu[j])) return kNegInf;
        const bool floored = !(mu[j] >= kMuFloor);
        const auto term = neg_binomial_term(p.x[j], p.lgx1[j], floored ? kMuFloor : mu[j], ch[j]);
        ll += term.log_pmf;
        d_phi[j] += term.d_phi;
        w[j] = floored ? 0.0 : term.d_mu;
      }
      if (!grad) continue;

      double beta_b = 0.0, rho_b = 0.0, nu_b = 0.0;
      DA alpha_b(0.0);  // sum of d(loglik)/d(alpha_m) * d(alpha_m)/d(params)
      double Sb = 0.0, Ib = 0.0;
      for (int m = M - 1; m >= 0; --m) {
        const Tape& t = tape[static_cast<std::size_t>(m)];
        const double inf_b = w[kCases] + w[kSusceptible] - Sb + Ib;
        const double vac_b = w[kVaccinations] + w[kSusceptible] - Sb;
        const double rec_b = w[kRecovered] - Ib;
        double S_in = Sb, I_in = Ib;
        if (t.clamp_r) {
          I_in += rec_b;
        } else {
          rho_b += rec_b * t.I * dt;
          I_in += rec_b * rho * dt;
        }
        double inf0_b = inf_b, vac0_b = vac_b;
        if (t.clamp_s) {
          const double tot = t.inf0 + t.vac0;
          const double f = t.inf0 / tot;
          S_in += inf_b * f + vac_b * (1.0 - f);
          const double f_b = t.S * (inf_b - vac_b);
          inf0_b = f_b * t.vac0 / (tot * tot);
          vac0_b = -f_b * t.inf0 / (tot * tot);
        }
        beta_b += inf0_b * t.I * t.S * c1;
        I_in += inf0_b * beta * t.S * c1;
        S_in += inf0_b * beta * t.I * c1;
        nu_b += vac0_b * t.S * (1.0 - t.alpha.v) * dt;
        S_in += vac0_b * nu * (1.0 - t.alpha.v) * dt;
        const double a_b = -vac0_b * nu * t.S * dt;
        for (int q = 0; q < 4; ++q) alpha_b.d[q] += a_b * t.alpha.d[q];
        Sb = S_in;
        Ib = I_in;
      }
      grad[L.beta_offset() + b] += beta_b;
      grad[L.rho_index()] += rho_b;
      grad[L.nu_offset() + n] += nu_b;
      if (L.has_gamma()) {
        grad[L.gamma_e_index()] += alpha_b.d[kTanGammaE];
        grad[L.gamma_p_index()] += alpha_b.d[kTanGammaP];
      }
      if (L.has_gamma_a()) grad[L.gamma_a_index()] += alpha_b.d[kTanGammaA];
      if (L.has_alpha0()) grad[L.alpha0_offset() + i] += alpha_b.d[kTanAlpha0];
    }
  }
  if (grad)
    for (int j = 0; j < 4; ++j) grad[L.phi_offset() + j] += d_phi[j];
  return std::isfinite(ll) ? ll : kNegInf;
}

Eigen::VectorXd LogPosterior::constrain(const Eigen::VectorXd& u) const {
  Eigen::VectorXd theta(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto& pr = layout_.prior_for(static_cast<std::size_t>(i), priors_);
    switch (transform_of(pr)) {
      case Transform::identity: theta[i] = u[i]; break;
      case Transform::log: theta[i] = pr.lower + std::exp(u[i]); break;
      case Transform::logit: theta[i] = pr.lower + (pr.upper - pr.lower) * sigmoid(u[i]); break;
    }
  }
  return theta;
}

Eigen::VectorXd LogPosterior::unconstrain(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd u(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const auto& pr = layout_.prior_for(static_cast<std::size_t>(i), priors_);
    switch (transform_of(pr)) {
      case Transform::identity: u[i] = theta[i]; break;
      case Transform::log: u[i] = std::log(std::max(theta[i] - pr.lower, 1e-300)); break;
      case Transform::logit: {
        const double f = std::clamp((theta[i] - pr.lower) / (pr.upper - pr.lower), 1e-12, 1.0 - 1e-12);
        u[i] = std::log(f) - std::log1p(-f);
        break;
      }
    }
  }
  return u;
}

double LogPosterior::log_density(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g;
  return log_density_gradient(u, g);
}

double LogPosterior::log_density_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const {
  const Eigen::Index n = static_cast<Eigen::Index>(dim());
  const Eigen::VectorXd theta = constrain(u);
  grad = Eigen::VectorXd::Zero(n);
  double lp = value_and_grad(std::span<const double>(theta.data(), theta.size()), grad.data());
  if (!std::isfinite(lp)) {
    grad.setZero();
    return kNegInf;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pr = layout_.prior_for(static_cast<std::size_t>(i), priors_);
    const double th = theta[i];
    lp += pr.log_density(th);
    const double dtheta_total = grad[i] + pr.d_log_density(th);
    switch (transform_of(pr)) {
      case Transform::identity: grad[i] = dtheta_total; break;
      case Transform::log: {
        const double jac = std::exp(u[i]);
        lp += u[i];
        grad[i] = dtheta_total * jac + 1.0;
        break;
      }
      case Transform::logit: {
        const double s = sigmoid(u[i]);
        const double width = pr.upper - pr.lower;
        lp += std::log(width) + std::log(s) + std::log1p(-s);
        grad[i] = dtheta_total * width * s * (1.0 - s) + (1.0 - 2.0 * s);
        break;
      }
    }
  }
  if (!std::isfinite(lp) || !grad.allFinite()) {
    grad.setZero();
    return kNegInf;
  }
  return lp;
}

double LogPosterior::log_likelihood(const ModelParams& params) const {
  const auto pts = pointwise_log_likelihood(params);
  double s = 0.0;
  for (double v : pts) s += v;
  return s;
}

std::vector<double> LogPosterior::pointwise_log_likelihood(const ModelParams& params) const {
  (void)layout_.pack(params);  // validates period and region counts
  const NegBinChannel ch[4] = {NegBinChannel(params.phi[0]), NegBinChannel(params.phi[1]),
                               NegBinChannel(params.phi[2]), NegBinChannel(params.phi[3])};
  std::vector<double> out;
  out.reserve(num_points());
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Region& reg = regions_[i];
    double alpha = layout_.has_alpha0() ? params.alpha0[i] : 0.0;
    for (std::size_t k = 0; k < n_intervals_; ++k) {
      const auto rr = rates_at(params, spec_, k);
      kernel::RatesT<double> r{rr.beta, rr.rho, rr.nu, rr.gamma_e, rr.gamma_p, rr.gamma_a};
      if (!layout_.has_gamma()) r.gamma_e = r.gamma_p = 0.0;
      if (!layout_.has_gamma_a()) r.gamma_a = 0.0;
      if (k < first_observed_) {
        alpha = kernel::advance_alpha(alpha, r, reg.exposure[k], spec_);
        continue;
      }
      const Point& p = reg.points[k - first_observed_];
      kernel::State<double> s{p.S, p.I, p.R, p.V, alpha};
      const auto d = kernel::integrate_interval(s, r, reg.N, reg.exposure[k], spec_);
      alpha = s.alpha;
      const double mu[4] = {d.cases, d.vaccinations, d.recovered, p.S - s.S};
      for (int j = 0; j < 4; ++j) {
        if (!std::isfinite(mu[j]))
          throw NumericalError("non-finite model mean at region " + layout_.region_ids[i] +
                               ", interval " + std::to_string(k + 1) + ", channel " +
                               std::string(kChannelNames[j]));
        out.push_back(neg_binomial_log_term(p.x[j], p.lgx1[j], std::max(mu[j], kMuFloor), ch[j]));
      }
    }
  }
  return out;
}

Eigen::VectorXd LogPosterior::initial_point() const {
  ModelParams p;
  p.beta.assign(layout_.n_beta, 0.2);
  p.nu.assign(layout_.n_nu, 0.0025);
  p.rho = 0.1;
  p.alpha0.assign(layout_.has_alpha0() ? layout_.n_regions() : 0, 0.2);
  p.phi = {10.0, 10.0, 10.0, 10.0};

  // Ratio estimators of beta, nu and rho per period from the observed data.
  std::vector<double> bn(layout_.n_beta, 0.0), bd(layout_.n_beta, 0.0);
  std::vector<double> nn(layout_.n_nu, 0.0), nd(layout_.n_nu, 0.0);
  double rn = 0.0, rd = 0.0;
  const double days = spec_.interval_days;
  for (const auto& reg : regions_) {
    for (std::size_t k = first_observed_; k < n_intervals_; ++k) {
      const Point& pt = reg.points[k - first_observed_];
      const std::size_t b = k / spec_.beta_period_intervals;
      const std::size_t n = k / spec_.nu_period_intervals;
      bn[b] += pt.x[kCases];
      bd[b] += pt.I * pt.S / reg.N * days;
      nn[n] += pt.x[kVaccinations];
      nd[n] += pt.S * 0.8 * days;
      rn += pt.x[kRecovered];
      rd += pt.I * days;
    }
  }
  for (std::size_t b = 0; b < bn.size(); ++b)
    if (bd[b] > 0.0 && bn[b] > 0.0) p.beta[b] = std::clamp(bn[b] / bd[b], 1e-4, 2.0);
  for (std::size_t n = 0; n < nn.size(); ++n)
    if (nd[n] > 0.0 && nn[n] > 0.0) p.nu[n] = std::clamp(nn[n] / nd[n], 1e-6, 0.5);
  if (rd > 0.0 && rn > 0.0) p.rho = std::clamp(rn / rd, 1e-3, 1.0);
  const auto theta = layout_.pack(p);
  return Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
}

std::vector<double> reconstruct_alpha(const ModelParams& params, const ModelSpec& spec,
                                      std::size_t region, std::span<const double> exposure,
                                      std::size_t intervals) {
  if (exposure.size() < intervals) throw InvalidInput("exposure shorter than the interval count");
  std::vector<double> alpha(intervals + 1, 0.0);
  if (!has_alpha(spec.variant)) return alpha;
  if (region >= params.alpha0.size()) throw InvalidInput("alpha0 missing for region");
  alpha[0] = params.alpha0[region];
  for (std::size_t k = 0; k < intervals; ++k) {
    const auto rr = rates_at(params, spec, k);
    kernel::RatesT<double> r{rr.beta, rr.rho, rr.nu, rr.gamma_e, rr.gamma_p, rr.gamma_a};
    alpha[k + 1] = kernel::advance_alpha(alpha[k], r, exposure[k], spec);
  }
  return alpha;
}

IntervalDeltas predicted_deltas(const ModelParams& params, const ModelSpec& spec,
                                const AlignedDataset& ds, const ExposureSeries& exposure,
                                std::size_t region, std::size_t t) {
  if (t < 1 || t > ds.num_intervals()) throw InvalidInput("interval index must be in [1, intervals]");
  if (region >= ds.num_regions()) throw InvalidInput("region index out of range");
  check_aligned(ds, exposure);
  const auto& r = ds.regions[region];
  std::vector<double> e(ds.num_intervals());
  for (std::size_t k = 0; k < e.size(); ++k)
    e[k] = exposure.values(static_cast<Eigen::Index>(region), static_cast<Eigen::Index>(k));
  const auto alpha = reconstruct_alpha(params, spec, region, e, t - 1);
  const EpidemicState start{r.susceptible[t - 1], r.infected[t - 1], r.recovered[t - 1],
                            r.vaccinated[t - 1], alpha[t - 1], r.population};
  const auto traj = simulate(start, params, spec, std::span<const double>(&e[t - 1], 1), 1, t - 1);
  IntervalDeltas d = traj.deltas.front();
  d.cases = std::max(d.cases, kMuFloor);
  d.vaccinations = std::max(d.vaccinations, kMuFloor);
  d.recovered = std::max(d.recovered, kMuFloor);
  d.susceptible_outflow = std::max(d.susceptible_outflow, kMuFloor);
  return d;
}

double log_likelihood(const ModelParams& params, const ModelSpec& spec, const AlignedDataset& ds,
                      const ExposureSeries& exposure) {
  ModelSpec s = spec;
  s.interval_days = ds.interval_days;
  LogPosterior post(ds, exposure, s, PriorSpec{});
  if (params.beta.size() < post.layout().n_beta || params.nu.size() < post.layout().n_nu)
    throw InvalidInput("piecewise parameters do not cover the dataset");
  ModelParams p = params;
  p.beta.resize(post.layout().n_beta);
  p.nu.resize(post.layout().n_nu);
  return post.log_likelihood(p);
}

}  // namespace hesitancy
