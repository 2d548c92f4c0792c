#include "hesitancy/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesitancy/error.hpp"

namespace hesitancy {

namespace {

double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

void check_chains(std::span<const std::vector<double>> chains) {
  if (chains.empty()) throw InvalidInput("no chains");
  for (const auto& c : chains)
    if (c.size() != chains.front().size()) throw InvalidInput("chains differ in length");
}

bool constant(std::span<const std::vector<double>> chains) {
  const double first = chains.front().empty() ? 0.0 : chains.front().front();
  for (const auto& c : chains)
    for (double x : c)
      if (x != first) return false;
  return true;
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double split_rhat(std::span<const std::vector<double>> chains) {
  check_chains(chains);
  const std::size_t half = chains.front().size() / 2;
  if (half < 2) return std::numeric_limits<double>::quiet_NaN();
  if (constant(chains)) return 1.0;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const std::span<const double> all(c);
    for (auto part : {all.first(half), all.last(half)}) {
      means.push_back(mean(part));
      vars.push_back(variance(part));
    }
  }
  const double n = static_cast<double>(half);
  const double w = mean(vars);
  const double b_over_n = variance(means);
  const double var_plus = (n - 1.0) / n * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(std::span<const std::vector<double>> chains) {
  check_chains(chains);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  if (constant(chains)) return total;

  // acov[c][t], biased (divided by n).
  std::vector<std::vector<double>> acov(m, std::vector<double>(n, 0.0));
  std::vector<double> chain_mean(m), chain_var(m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto& x = chains[c];
    chain_mean[c] = mean(x);
    for (std::size_t t = 0; t < n; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i + t < n; ++i) s += (x[i] - chain_mean[c]) * (x[i + t] - chain_mean[c]);
      acov[c][t] = s / static_cast<double>(n);
    }
    chain_var[c] = acov[c][0] * n / (n - 1.0);
  }
  const double mean_var = mean(chain_var);
  double var_plus = mean_var * (n - 1.0) / n;
  if (m > 1) var_plus += variance(chain_mean);
  auto mean_acov = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += acov[c][t];
    return s / static_cast<double>(m);
  };

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t < n - 5 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t + 1] = rho_even;
  // Initial monotone sequence.
  for (std::size_t k = 1; k + 3 <= max_t; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = (rho[k - 1] + rho[k]) / 2.0;
      rho[k + 2] = rho[k + 1];
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < max_t; ++k) sum += rho[k];
  const double tau = -1.0 + 2.0 * sum + rho[max_t + 1];
  return std::min(total / tau, total * std::log10(total));
}

Interval hdi(std::span<const double> draws, double mass) {
  if (draws.empty()) throw InvalidInput("HDI of an empty sample");
  if (!(mass > 0.0 && mass <= 1.0)) throw InvalidInput("HDI mass must lie in (0, 1]");
  std::vector<double> x(draws.begin(), draws.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(mass * n - 1e-9)), 1, n);
  std::size_t best = 0;
  for (std::size_t i = 1; i + k <= n; ++i)
    if (x[i + k - 1] - x[i] < x[best + k - 1] - x[best]) best = i;
  return {x[best], x[best + k - 1]};
}

}  // namespace hesitancy
