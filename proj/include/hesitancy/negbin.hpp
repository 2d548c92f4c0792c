#pragma once

namespace hesitancy {

// log P(x | mu, phi) for the mean/dispersion negative binomial, with the
// binomial coefficient expressed through log-gamma so phi may be non-integer.
// Throws DomainError for x < 0, mu <= 0 or phi <= 0.
double neg_binomial_log_pmf(double x, double mu, double phi);

// Per-dispersion constants shared by every term of a channel.
struct NegBinChannel {
  double phi;
  double log_phi;
  double lgamma_phi;
  double digamma_phi;

  explicit NegBinChannel(double phi);
};

struct NegBinTerm {
  double log_pmf = 0.0;
  double d_mu = 0.0;
  double d_phi = 0.0;
};

// Density plus partial derivatives. `lgamma_x1` is lgamma(x + 1). No argument checks.
NegBinTerm neg_binomial_term(double x, double lgamma_x1, double mu, const NegBinChannel& channel);

// Density only.
double neg_binomial_log_term(double x, double lgamma_x1, double mu, const NegBinChannel& channel);

}  // namespace hesitancy
