#include "commands.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/logging.hpp"
#include "chiralmag/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace chiralmag;

int main(int argc, char** argv) {
  if (!init_logging_from_env()) {
    std::cerr << "CHIRALMAG_LOG must be one of error, info, debug\n";
    return cli::kConfigError;
  }

  CLI::App app{"chiralmag: magnetoelastic energy minimization and quasistatic evolution"};
  app.require_subcommand(1);
  cli::Options o;
  unsigned long long seed = 0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "JSON run configuration");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--threads", o.threads, "Worker thread cap")->check(CLI::NonNegativeNumber);
  };

  auto* minimize = app.add_subcommand("minimize", "Static minimization of the total energy");
  common(minimize, true);
  auto* evolve = app.add_subcommand("evolve", "Incremental minimization over the time partition");
  common(evolve, true);
  auto* check = app.add_subcommand("check", "Run an invariant suite");
  common(check, false);
  check->add_option("--suite", o.suite, "piola, degree, geometry, ciarlet_necas, dissipation, coercivity, "
                                        "strayfield, gradients or all");
  auto* degree = app.add_subcommand("degree", "Print deg(y, Omega, xi) for the configured state");
  common(degree, true);
  degree->add_option("--point", o.point, "Query point X Y Z")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kConfigError;
  }
  if (app.get_subcommands().front()->count("--seed") > 0) o.seed = seed;
  if (o.threads > 0) set_thread_count(o.threads);

  try {
    if (minimize->parsed()) return cli::cmd_minimize(o);
    if (evolve->parsed()) return cli::cmd_evolve(o);
    if (check->parsed()) return cli::cmd_check(o);
    return cli::cmd_degree(o);
  } catch (const Error& e) {
    log_error(e.what());
    return cli::kConfigError;
  } catch (const std::exception& e) {
    log_error(e.what());
    return cli::kConfigError;
  }
}
