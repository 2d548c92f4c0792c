#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "hesitancy/error.hpp"

using namespace hesitancy;

int main(int argc, char** argv) {
  CLI::App app{"Vaccine-hesitancy epidemic model: simulation, inference and effect estimation"};
  app.require_subcommand(1);
  cli::CommonOptions opt;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out, variant;

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const RunConfig&)> run;
  };
  const Command commands[] = {
      {"simulate", "integrate the model forward and write trajectory.csv", cli::cmd_simulate},
      {"synth", "draw a synthetic panel (panel.csv, network.csv, exposure.csv, truth.json)", cli::cmd_synth},
      {"fit", "sample the posterior (posterior.csv, diagnostics.json)",
       [&](const RunConfig& c) { return cli::cmd_fit(c, opt.allow_bad_diagnostics); }},
      {"ate", "average treatment effect and prevented vaccinations (effect.json)", cli::cmd_ate},
      {"counterfactual", "zero-exposure counterfactual (counterfactual.json)", cli::cmd_counterfactual},
      {"risk", "unvaccinated risks and attributable outcomes (risk.json)", cli::cmd_risk},
      {"loo", "PSIS-LOO and model comparison (elpd.json, compare.json)", cli::cmd_loo},
      {"shuffle-test", "refit on region-shuffled exposure (shuffle_test.json)",
       [&](const RunConfig& c) { return cli::cmd_shuffle_test(c, opt.allow_bad_diagnostics); }},
  };
  std::function<int(const RunConfig&)> selected;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", opt.config, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "root seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--variant", variant, "model variant: sirva, sirv, sirva_static, sirva_wom");
    sub->add_flag("--allow-bad-diagnostics", opt.allow_bad_diagnostics,
                  "exit 0 even when R-hat or divergence checks fail");
    sub->callback([&selected, &cmd] { selected = cmd.run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kInvalidInput;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--threads")) opt.threads = threads;
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--variant")) opt.variant = variant;
  }

  try {
    return selected(cli::resolve_config(opt));
  } catch (const MissingArtifact& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kMissingArtifact;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kInvalidInput;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kInvalidInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kFailure;
  }
}
