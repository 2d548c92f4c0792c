#include "hesitancy/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "hesitancy/error.hpp"
#include "hesitancy/nuts.hpp"
#include "hesitancy/optimize.hpp"
#include "hesitancy/rng.hpp"

namespace hesitancy {

void SamplerConfig::validate() const {
  if (chains < 2) throw InvalidInput("sampler needs at least 2 chains");
  if (warmup < 0) throw InvalidInput("warmup must be non-negative");
  if (draws < 1) throw InvalidInput("draws must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw InvalidInput("target_accept must lie in (0, 1)");
  if (max_depth < 1 || max_depth > 15) throw InvalidInput("max_depth must lie in [1, 15]");
  if (threads < 0) throw InvalidInput("threads must be non-negative");
}

std::optional<std::size_t> PosteriorSamples::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

std::vector<double> PosteriorSamples::column(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) throw InvalidInput("posterior has no parameter '" + std::string(name) + "'");
  std::vector<double> out(num_draws());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*idx));
  return out;
}

ModelParams PosteriorSamples::params(std::size_t row) const {
  const Eigen::VectorXd v = values.row(static_cast<Eigen::Index>(row)).transpose();
  return layout().unpack(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void update_diagnostics(PosteriorSamples& s) {
  auto& d = s.diagnostics;
  d.rhat.assign(s.names.size(), 1.0);
  d.ess.assign(s.names.size(), 0.0);
  d.max_rhat = 1.0;
  d.min_ess = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.names.size(); ++p) {
    std::vector<std::vector<double>> chains(s.num_chains, std::vector<double>(s.draws_per_chain));
    for (std::size_t c = 0; c < s.num_chains; ++c)
      for (std::size_t k = 0; k < s.draws_per_chain; ++k)
        chains[c][k] = s.values(static_cast<Eigen::Index>(c * s.draws_per_chain + k), static_cast<Eigen::Index>(p));
    d.rhat[p] = split_rhat(chains);
    d.ess[p] = effective_sample_size(chains);
    if (std::isfinite(d.rhat[p])) d.max_rhat = std::max(d.max_rhat, d.rhat[p]);
    if (std::isfinite(d.ess[p])) d.min_ess = std::min(d.min_ess, d.ess[p]);
  }
  if (!std::isfinite(d.min_ess)) d.min_ess = 0.0;
  long long div = 0;
  for (const auto& c : d.chains) div += c.divergences;
  d.divergent_fraction = s.num_draws() > 0 ? static_cast<double>(div) / static_cast<double>(s.num_draws()) : 0.0;
  d.divergence_warning = d.divergent_fraction > 0.10;
  d.rhat_warning = d.max_rhat > 1.01;
}

PosteriorSamples sample_posterior(const AlignedDataset& dataset, const ExposureSeries& exposure,
                                  const ModelSpec& spec, const PriorSpec& priors,
                                  const SamplerConfig& config) {
  config.validate();
  const LogPosterior post(dataset, exposure, spec, priors);
  const LogDensityFn f = [&post](const Eigen::VectorXd& u, Eigen::VectorXd& g) {
    return post.log_density_gradient(u, g);
  };
  NutsOptions opt;
  opt.warmup = config.warmup;
  opt.draws = config.draws;
  opt.target_accept = config.target_accept;
  opt.max_depth = config.max_depth;
  opt.dense_metric = config.dense_metric;
  opt.adapt_metric = config.adapt_metric;

  Eigen::VectorXd start = post.unconstrain(post.initial_point());
  Eigen::MatrixXd start_chol;  // lower factor of the Laplace covariance
  if (config.laplace_init) {
    const ModeResult mode = find_mode(f, start);
    start = mode.point;
    opt.initial_inv_metric = regularized_covariance(mode.precision);
    start_chol = Eigen::LLT<Eigen::MatrixXd>(opt.initial_inv_metric).matrixL();
  }

  const std::size_t n_chains = static_cast<std::size_t>(config.chains);
  std::vector<NutsChain> results(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  auto run_chain = [&](std::size_t c) {
    try {
      Rng init_rng = make_rng(config.seed, "fit-init", c);
      Eigen::VectorXd init = start;
      if (start_chol.size() > 0) {
        // One Laplace draw, so chains start overdispersed around the mode.
        Eigen::VectorXd z(init.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std_normal(init_rng);
        init += start_chol * z;
      } else {
        // Log/logit coordinates jitter by up to 0.1; unbounded coefficients
        // (gamma) by up to 1e-3, since a large negative drift pins alpha at 0
        // where the likelihood is flat in gamma_e.
        for (Eigen::Index i = 0; i < init.size(); ++i) {
          const auto& prior = post.layout().prior_for(static_cast<std::size_t>(i), priors);
          const double width = std::isfinite(prior.lower) ? 0.2 : 2e-3;
          init[i] += (uniform01(init_rng) - 0.5) * width;
        }
      }
      Rng rng = make_rng(config.seed, "fit", c);
      results[c] = run_nuts(f, init, opt, rng);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_chains));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chains; ++c) run_chain(c);
  } else {
    std::size_t next = 0;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard lock(m);
            if (next >= n_chains) return;
            c = next++;
          }
          run_chain(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  PosteriorSamples s;
  s.names = post.layout().names();
  s.num_chains = n_chains;
  s.draws_per_chain = static_cast<std::size_t>(config.draws);
  s.values.resize(static_cast<Eigen::Index>(n_chains * s.draws_per_chain), static_cast<Eigen::Index>(post.dim()));
  for (std::size_t c = 0; c < n_chains; ++c) {
    const auto& r = results[c];
    for (std::size_t k = 0; k < s.draws_per_chain; ++k) {
      const Eigen::VectorXd theta = post.constrain(r.draws.row(static_cast<Eigen::Index>(k)).transpose());
      s.values.row(static_cast<Eigen::Index>(c * s.draws_per_chain + k)) = theta.transpose();
    }
    ChainDiagnostics cd;
    cd.divergences = static_cast<int>(std::count(r.divergent.begin(), r.divergent.end(), true));
    cd.warmup_divergences = r.warmup_divergences;
    cd.mean_accept = mean(r.accept_stat);
    cd.step_size = r.step_size;
    double depth = 0.0;
    for (int dpt : r.tree_depth) {
      depth += dpt;
      if (dpt >= config.max_depth) ++cd.max_depth_hits;
    }
    cd.mean_tree_depth = depth / static_cast<double>(r.tree_depth.size());
    for (int l : r.n_leapfrog) cd.leapfrog_steps += l;
    s.diagnostics.chains.push_back(cd);
  }
  update_diagnostics(s);
  return s;
}

double tail_probability(std::span<const double> draws, double threshold, TailDirection direction) {
  if (draws.empty()) throw InvalidInput("tail probability of an empty sample");
  std::size_t violating = 0;
  for (double x : draws) {
    if (direction == TailDirection::greater ? x <= threshold : x >= threshold) ++violating;
  }
  const double n = static_cast<double>(draws.size());
  return std::max(static_cast<double>(violating) / n, 1.0 / (n + 1.0));
}

double tail_probability(const PosteriorSamples& samples, std::string_view parameter, double threshold,
                        TailDirection direction) {
  return tail_probability(samples.column(parameter), threshold, direction);
}

void write_posterior_csv(const std::filesystem::path& path, const PosteriorSamples& s) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "chain,draw,parameter,value\n";
  char buf[64];
  for (std::size_t c = 0; c < s.num_chains; ++c) {
    for (std::size_t k = 0; k < s.draws_per_chain; ++k) {
      const auto row = static_cast<Eigen::Index>(c * s.draws_per_chain + k);
      for (std::size_t p = 0; p < s.names.size(); ++p) {
        std::snprintf(buf, sizeof buf, "%.17g", s.values(row, static_cast<Eigen::Index>(p)));
        out << c << ',' << k << ',' << s.names[p] << ',' << buf << '\n';
      }
    }
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

PosteriorSamples read_posterior_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path.string());
  std::string line;
  if (!std::getline(in, line) || line != "chain,draw,parameter,value")
    throw ParseError(path.string(), 1, "expected header chain,draw,parameter,value");

  struct Entry {
    std::size_t chain, draw, param;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<std::string> names;
  std::map<std::string, std::size_t> name_index;
  std::size_t max_chain = 0, max_draw = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    const auto c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string::npos) throw ParseError(path.string(), lineno, "expected 4 fields");
    Entry e{};
    auto parse_idx = [&](std::size_t b, std::size_t end, std::size_t& out) {
      auto [p, ec] = std::from_chars(line.data() + b, line.data() + end, out);
      if (ec != std::errc() || p != line.data() + end) throw ParseError(path.string(), lineno, "bad index");
    };
    parse_idx(0, c1, e.chain);
    parse_idx(c1 + 1, c2, e.draw);
    const std::string name = line.substr(c2 + 1, c3 - c2 - 1);
    auto [it, inserted] = name_index.emplace(name, names.size());
    if (inserted) names.push_back(name);
    e.param = it->second;
    try {
      std::size_t used = 0;
      e.value = std::stod(line.substr(c3 + 1), &used);
      if (c3 + 1 + used != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad value");
    }
    max_chain = std::max(max_chain, e.chain);
    max_draw = std::max(max_draw, e.draw);
    entries.push_back(e);
  }
  if (entries.empty()) throw InvalidInput(path.string() + ": no posterior draws");
  PosteriorSamples s;
  s.names = names;
  s.num_chains = max_chain + 1;
  s.draws_per_chain = max_draw + 1;
  const std::size_t rows = s.num_chains * s.draws_per_chain;
  if (entries.size() != rows * names.size())
    throw InvalidInput(path.string() + ": posterior draws are not a complete chain x draw x parameter grid");
  s.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()),
                                       std::numeric_limits<double>::quiet_NaN());
  for (const auto& e : entries)
    s.values(static_cast<Eigen::Index>(e.chain * s.draws_per_chain + e.draw), static_cast<Eigen::Index>(e.param)) = e.value;
  if (!s.values.allFinite()) throw InvalidInput(path.string() + ": missing or non-finite posterior entries");
  ParameterLayout::from_names(s.names);
  update_diagnostics(s);
  return s;
}

}  // namespace hesitancy
