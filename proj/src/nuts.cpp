#include "hesitancy/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hesitancy/error.hpp"

namespace hesitancy {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct PhasePoint {
  VectorXd q;
  VectorXd p;
  VectorXd grad;  // gradient of the log density
  double logp = -kInf;
};

class Metric {
 public:
  explicit Metric(Eigen::Index n, bool dense) : dense_(dense), inv_(MatrixXd::Identity(n, n)) { factor(); }

  void set(const MatrixXd& inv) {
    inv_ = inv;
    factor();
  }
  const MatrixXd& inverse() const { return inv_; }

  VectorXd velocity(const VectorXd& p) const {
    return dense_ ? VectorXd(inv_ * p) : VectorXd(inv_.diagonal().cwiseProduct(p));
  }
  double kinetic(const VectorXd& p) const { return 0.5 * p.dot(velocity(p)); }

  VectorXd sample_momentum(Rng& rng) const {
    VectorXd u(inv_.rows());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std_normal(rng);
    if (!dense_) return u.cwiseQuotient(inv_.diagonal().cwiseSqrt());
    return upper_.triangularView<Eigen::Upper>().solve(u);
  }

 private:
  void factor() {
    if (dense_) upper_ = inv_.llt().matrixU();
  }

  bool dense_;
  MatrixXd inv_;
  MatrixXd upper_;  // inverse metric = upper_^T upper_
};

class Sampler {
 public:
  Sampler(const LogDensityFn& f, const NutsOptions& opt, Rng& rng, Eigen::Index dim)
      : f_(f), opt_(opt), rng_(rng), metric_(dim, opt.dense_metric) {}

  void evaluate(PhasePoint& z) const {
    z.logp = f_(z.q, z.grad);
    if (std::isnan(z.logp)) z.logp = -kInf;
  }

  double hamiltonian(const PhasePoint& z) const {
    const double h = -z.logp + metric_.kinetic(z.p);
    return std::isnan(h) ? kInf : h;
  }

  void leapfrog(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * metric_.velocity(z.p);
    evaluate(z);
    if (z.logp == -kInf) return;
    z.p += 0.5 * eps * z.grad;
  }

  void init_step_size(const PhasePoint& start) {
    PhasePoint z = start;
    z.p = metric_.sample_momentum(rng_);
    double h0 = hamiltonian(z);
    leapfrog(z, eps_);
    double delta = h0 - hamiltonian(z);
    const int direction = delta > std::log(0.8) ? 1 : -1;
    for (int iter = 0; iter < 100; ++iter) {
      z = start;
      z.p = metric_.sample_momentum(rng_);
      h0 = hamiltonian(z);
      leapfrog(z, eps_);
      delta = h0 - hamiltonian(z);
      if (direction == 1 && !(delta > std::log(0.8))) break;
      if (direction == -1 && !(delta < std::log(0.8))) break;
      eps_ = direction == 1 ? 2.0 * eps_ : 0.5 * eps_;
      if (eps_ > 1e7) throw NumericalError("step size diverged while initialising; posterior may be improper");
      if (eps_ < 1e-12) break;
    }
  }

  static bool criterion(const VectorXd& sharp_minus, const VectorXd& sharp_plus, const VectorXd& rho) {
    return sharp_plus.dot(rho) > 0.0 && sharp_minus.dot(rho) > 0.0;
  }

  bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, VectorXd& sharp_beg, VectorXd& sharp_end,
                  VectorXd& rho, VectorXd& p_beg, VectorXd& p_end, double h0, double sign, int& n_leapfrog,
                  double& log_sum_weight, double& sum_metro_prob) {
    if (depth == 0) {
      leapfrog(z, sign * eps_);
      ++n_leapfrog;
      const double h = hamiltonian(z);
      if (h - h0 > opt_.max_delta_h) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z;
      sharp_beg = metric_.velocity(z.p);
      sharp_end = sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }
    const Eigen::Index n = z.q.size();
    VectorXd rho_left = VectorXd::Zero(n);
    VectorXd sharp_left(n), p_left(n);
    double lsw_left = -kInf;
    if (!build_tree(depth - 1, z, z_propose, sharp_beg, sharp_left, rho_left, p_beg, p_left, h0, sign,
                    n_leapfrog, lsw_left, sum_metro_prob))
      return false;

    PhasePoint z_propose_right = z;
    VectorXd rho_right = VectorXd::Zero(n);
    VectorXd sharp_right(n), p_right(n);
    double lsw_right = -kInf;
    if (!build_tree(depth - 1, z, z_propose_right, sharp_right, sharp_end, rho_right, p_right, p_end, h0,
                    sign, n_leapfrog, lsw_right, sum_metro_prob))
      return false;

    const double lsw_subtree = log_sum_exp(lsw_left, lsw_right);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_right > lsw_subtree || uniform01(rng_) < std::exp(lsw_right - lsw_subtree))
      z_propose = z_propose_right;

    const VectorXd rho_subtree = rho_left + rho_right;
    rho += rho_subtree;
    bool persist = criterion(sharp_beg, sharp_end, rho_subtree);
    persist = persist && criterion(sharp_beg, sharp_right, VectorXd(rho_left + p_right));
    persist = persist && criterion(sharp_left, sharp_end, VectorXd(rho_right + p_left));
    return persist;
  }

  struct Transition {
    double accept_stat = 0.0;
    int depth = 0;
    int n_leapfrog = 0;
    bool divergent = false;
  };

  Transition transition(PhasePoint& state) {
    PhasePoint z = state;
    z.p = metric_.sample_momentum(rng_);
    const double h0 = hamiltonian(z);
    divergent_ = false;

    PhasePoint z_fwd = z, z_bck = z, z_sample = z, z_propose = z;
    VectorXd p_fwd_fwd = z.p, p_fwd_bck = z.p, p_bck_fwd = z.p, p_bck_bck = z.p;
    VectorXd sharp = metric_.velocity(z.p);
    VectorXd s_fwd_fwd = sharp, s_fwd_bck = sharp, s_bck_fwd = sharp, s_bck_bck = sharp;
    VectorXd rho = z.p;
    const Eigen::Index n = z.q.size();

    double log_sum_weight = 0.0;
    double sum_metro_prob = 0.0;
    int n_leapfrog = 0;
    int depth = 0;

    while (depth < opt_.max_depth) {
      VectorXd rho_fwd = VectorXd::Zero(n), rho_bck = VectorXd::Zero(n);
      double lsw_subtree = -kInf;
      bool valid;
      if (uniform01(rng_) > 0.5) {
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        s_bck_fwd = s_fwd_bck;
        valid = build_tree(depth, z_fwd, z_propose, s_fwd_bck, s_fwd_fwd, rho_fwd, p_fwd_bck, p_fwd_fwd, h0,
                           1.0, n_leapfrog, lsw_subtree, sum_metro_prob);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        s_fwd_bck = s_bck_fwd;
        valid = build_tree(depth, z_bck, z_propose, s_bck_fwd, s_bck_bck, rho_bck, p_bck_fwd, p_bck_bck, h0,
                           -1.0, n_leapfrog, lsw_subtree, sum_metro_prob);
      }
      if (!valid) break;
      ++depth;

      if (lsw_subtree > log_sum_weight || uniform01(rng_) < std::exp(lsw_subtree - log_sum_weight))
        z_sample = z_propose;
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = criterion(s_bck_bck, s_fwd_fwd, rho);
      persist = persist && criterion(s_bck_bck, s_fwd_bck, VectorXd(rho_bck + p_fwd_bck));
      persist = persist && criterion(s_bck_fwd, s_fwd_fwd, VectorXd(rho_fwd + p_bck_fwd));
      if (!persist) break;
    }

    state = z_sample;
    Transition t;
    t.accept_stat = n_leapfrog > 0 ? sum_metro_prob / n_leapfrog : 0.0;
    t.depth = depth;
    t.n_leapfrog = n_leapfrog;
    t.divergent = divergent_;
    return t;
  }

  double& eps() { return eps_; }
  Metric& metric() { return metric_; }

 private:
  const LogDensityFn& f_;
  const NutsOptions& opt_;
  Rng& rng_;
  Metric metric_;
  double eps_ = 1.0;
  bool divergent_ = false;
};

class StepSizeAdapter {
 public:
  explicit StepSizeAdapter(double delta) : delta_(delta) {}
  void restart(double eps) {
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
    mu_ = std::log(10.0 * eps);
  }
  double learn(double accept) {
    ++counter_;
    accept = std::min(1.0, accept);
    const double eta = 1.0 / (counter_ + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept);
    const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / kGamma;
    const double x_eta = std::pow(static_cast<double>(counter_), -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }
  double final_step() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kKappa = 0.75;
  static constexpr double kT0 = 10.0;
  double delta_;
  long counter_ = 0;
  double s_bar_ = 0.0, x_bar_ = 0.0, mu_ = 0.0;
};

// Windowed schedule: a fast initial buffer, doubling slow windows that
// estimate the metric, then a fast terminal buffer.
class WindowSchedule {
 public:
  explicit WindowSchedule(int warmup) : warmup_(warmup) {
    if (warmup < 20) {
      enabled_ = false;
      return;
    }
    if (init_ + term_ + base_ > warmup) {
      init_ = static_cast<int>(0.15 * warmup);
      term_ = static_cast<int>(0.1 * warmup);
      base_ = warmup - (init_ + term_);
    }
    window_size_ = base_;
    next_window_ = init_ + window_size_ - 1;
  }

  bool in_window() const {
    return enabled_ && counter_ >= init_ && counter_ < warmup_ - term_ && counter_ != warmup_;
  }
  bool end_of_window() const { return enabled_ && counter_ == next_window_ && counter_ != warmup_; }
  void advance() { ++counter_; }
  void compute_next_window() {
    if (next_window_ == warmup_ - term_ - 1) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != warmup_ - term_ - 1) {
      const int boundary = next_window_ + 2 * window_size_;
      if (boundary >= warmup_ - term_) next_window_ = warmup_ - term_ - 1;
    }
  }

 private:
  int warmup_;
  bool enabled_ = true;
  int init_ = 75, term_ = 50, base_ = 25;
  int window_size_ = 0, next_window_ = 0, counter_ = 0;
};

}  // namespace

NutsChain run_nuts(const LogDensityFn& log_density, const VectorXd& init, const NutsOptions& opt, Rng& rng) {
  if (opt.warmup < 0 || opt.draws < 1) throw InvalidInput("NUTS needs warmup >= 0 and draws >= 1");
  if (!(opt.target_accept > 0.0 && opt.target_accept < 1.0))
    throw InvalidInput("target acceptance must lie in (0, 1)");
  if (opt.max_depth < 1) throw InvalidInput("max tree depth must be positive");
  const Eigen::Index n = init.size();
  Sampler sampler(log_density, opt, rng, n);
  if (opt.initial_inv_metric.size() > 0) {
    if (opt.initial_inv_metric.rows() != n || opt.initial_inv_metric.cols() != n)
      throw InvalidInput("initial inverse metric has the wrong shape");
    sampler.metric().set(opt.dense_metric ? opt.initial_inv_metric
                                          : MatrixXd(opt.initial_inv_metric.diagonal().asDiagonal()));
  }

  // Window estimates shrink toward the supplied metric, or 1e-3 * I without one.
  MatrixXd shrink_target = 1e-3 * MatrixXd::Identity(n, n);
  if (opt.initial_inv_metric.size() > 0) shrink_target = sampler.metric().inverse();

  PhasePoint state;
  state.q = init;
  state.p = VectorXd::Zero(n);
  state.grad = VectorXd::Zero(n);
  sampler.evaluate(state);
  if (state.logp == -kInf) throw NumericalError("log density is not finite at the initial point");

  if (n > 0) sampler.init_step_size(state);
  StepSizeAdapter adapter(opt.target_accept);
  adapter.restart(sampler.eps());
  WindowSchedule schedule(opt.adapt_metric ? opt.warmup : 0);

  VectorXd mean = VectorXd::Zero(n);
  MatrixXd m2 = MatrixXd::Zero(n, n);
  long window_n = 0;

  NutsChain out;
  for (int it = 0; it < opt.warmup; ++it) {
    const auto t = sampler.transition(state);
    if (t.divergent) ++out.warmup_divergences;
    sampler.eps() = adapter.learn(t.accept_stat);
    if (schedule.in_window()) {
      ++window_n;
      const VectorXd delta = state.q - mean;
      mean += delta / static_cast<double>(window_n);
      if (opt.dense_metric)
        m2 += (state.q - mean) * delta.transpose();
      else
        m2.diagonal() += (state.q - mean).cwiseProduct(delta);
    }
    if (schedule.end_of_window()) {
      schedule.compute_next_window();
      if (window_n > 1) {
        const double w = static_cast<double>(window_n);
        MatrixXd cov = m2 / (w - 1.0);
        if (!opt.dense_metric) cov = MatrixXd(cov.diagonal().asDiagonal());
        cov = (w / (w + 5.0)) * cov + (5.0 / (w + 5.0)) * shrink_target;
        sampler.metric().set(cov);
      }
      window_n = 0;
      mean.setZero();
      m2.setZero();
      sampler.init_step_size(state);
      adapter.restart(sampler.eps());
    }
    schedule.advance();
  }
  if (opt.warmup > 0) sampler.eps() = adapter.final_step();

  out.draws.resize(opt.draws, n);
  for (int it = 0; it < opt.draws; ++it) {
    const auto t = sampler.transition(state);
    out.draws.row(it) = state.q.transpose();
    out.accept_stat.push_back(t.accept_stat);
    out.tree_depth.push_back(t.depth);
    out.n_leapfrog.push_back(t.n_leapfrog);
    out.divergent.push_back(t.divergent);
  }
  out.step_size = sampler.eps();
  out.inv_metric = sampler.metric().inverse();
  return out;
}

}  // namespace hesitancy
