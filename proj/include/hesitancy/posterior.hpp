#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hesitancy/data_io.hpp"
#include "hesitancy/dynamics.hpp"
#include "hesitancy/exposure.hpp"
#include "hesitancy/priors.hpp"

namespace hesitancy {

inline constexpr double kMuFloor = 1e-6;

// Flat parameter vector layout, in order:
//   beta[0..], rho, nu[0..], gamma_e, gamma_p, gamma_a, alpha0[<region>]..., phi_C, phi_V, phi_R, phi_S
// Entries absent from the variant are omitted (sirv has no gamma/alpha0,
// sirva_static no gamma, only sirva_wom has gamma_a).
struct ParameterLayout {
  ModelVariant variant = ModelVariant::sirva;
  std::size_t n_beta = 1;
  std::size_t n_nu = 1;
  std::vector<std::string> region_ids;

  ParameterLayout() = default;
  ParameterLayout(ModelVariant variant, std::size_t n_beta, std::size_t n_nu,
                  std::vector<std::string> region_ids);

  std::size_t n_regions() const { return region_ids.size(); }
  bool has_gamma() const { return has_dynamic_alpha(variant); }
  bool has_gamma_a() const { return variant == ModelVariant::sirva_wom; }
  bool has_alpha0() const { return has_alpha(variant); }

  std::size_t beta_offset() const { return 0; }
  std::size_t rho_index() const { return n_beta; }
  std::size_t nu_offset() const { return n_beta + 1; }
  std::size_t gamma_e_index() const { return n_beta + 1 + n_nu; }
  std::size_t gamma_p_index() const { return gamma_e_index() + 1; }
  std::size_t gamma_a_index() const { return gamma_e_index() + (has_gamma() ? 2 : 0); }
  std::size_t alpha0_offset() const {
    return gamma_e_index() + (has_gamma() ? 2 : 0) + (has_gamma_a() ? 1 : 0);
  }
  std::size_t phi_offset() const { return alpha0_offset() + (has_alpha0() ? n_regions() : 0); }
  std::size_t size() const { return phi_offset() + 4; }

  std::vector<std::string> names() const;
  // Inverse of names(); throws InvalidInput on an unrecognised layout.
  static ParameterLayout from_names(std::span<const std::string> names);

  ModelParams unpack(std::span<const double> theta) const;
  std::vector<double> pack(const ModelParams& params) const;

  const PriorTerm& prior_for(std::size_t index, const PriorSpec& priors) const;
};

// Unnormalized log posterior on the unconstrained scale (log for positive
// parameters, logit for alpha0), with one-step-ahead likelihood terms.
class LogPosterior {
 public:
  // `exposure` rows must match the dataset's regions, in order.
  LogPosterior(const AlignedDataset& dataset, const ExposureSeries& exposure, const ModelSpec& spec,
               const PriorSpec& priors);

  const ParameterLayout& layout() const { return layout_; }
  const ModelSpec& spec() const { return spec_; }
  std::size_t dim() const { return layout_.size(); }
  std::size_t num_points() const { return 4 * n_obs_intervals_ * regions_.size(); }

  Eigen::VectorXd constrain(const Eigen::VectorXd& u) const;
  Eigen::VectorXd unconstrain(const Eigen::VectorXd& theta) const;

  // Log density including the log-Jacobian; -inf where the model is not finite.
  double log_density(const Eigen::VectorXd& u) const;
  double log_density_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const;

  // Constrained-scale pieces. Both throw NumericalError on a non-finite mean.
  double log_likelihood(const ModelParams& params) const;
  // Ordered by region, then observed interval, then channel C, V, R, S.
  std::vector<double> pointwise_log_likelihood(const ModelParams& params) const;

  // Moment-based starting point on the constrained scale.
  Eigen::VectorXd initial_point() const;

 private:
  struct Point {
    double x[4];
    double lgx1[4];
    double S, I, R, V;
  };
  struct Region {
    double N;
    std::vector<double> exposure;  // per interval
    std::vector<Point> points;     // per observed interval
  };

  double value_and_grad(std::span<const double> theta, double* grad_theta) const;

  ModelSpec spec_;
  PriorSpec priors_;
  ParameterLayout layout_;
  std::size_t n_intervals_ = 0;
  std::size_t first_observed_ = 0;
  std::size_t n_obs_intervals_ = 0;
  std::vector<Region> regions_;
};

// Latent hesitancy ratio at every grid point (intervals + 1 values).
std::vector<double> reconstruct_alpha(const ModelParams& params, const ModelSpec& spec,
                                      std::size_t region, std::span<const double> exposure,
                                      std::size_t intervals);

// Model mean of the four channels over grid interval (t-1, t), started from
// the observed state at t-1. Floored at kMuFloor.
IntervalDeltas predicted_deltas(const ModelParams& params, const ModelSpec& spec,
                                const AlignedDataset& dataset, const ExposureSeries& exposure,
                                std::size_t region, std::size_t t);

double log_likelihood(const ModelParams& params, const ModelSpec& spec, const AlignedDataset& dataset,
                      const ExposureSeries& exposure);

// Number of beta and nu periods needed to cover a dataset (at least one each).
std::size_t beta_periods_for(const ModelSpec& spec, const AlignedDataset& dataset);
std::size_t nu_periods_for(const ModelSpec& spec, const AlignedDataset& dataset);

}  // namespace hesitancy
