#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levelstat/experiment.hpp"
#include "levelstat/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

int execute(levelstat::ExperimentKind kind, const Flags& flags) {
  using namespace levelstat;
  RunConfig cfg = load_config(flags.config);
  if (cfg.experiment != kind) {
    std::cerr << "levelstat: config " << flags.config << " describes experiment '"
              << experiment_name(cfg.experiment) << "', not '" << experiment_name(kind) << "'\n";
    return kExitError;
  }
  cfg.spec.seed = resolve_seed(flags.seed, std::getenv("LEVELSTAT_SEED"), cfg.spec.seed);
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  const std::string stem = cfg.output_stem.empty() ? std::string(experiment_name(kind)) : cfg.output_stem;

  const ResultRecord rec = run(cfg, RunOptions{flags.threads});
  for (const auto& path : emit_all(rec, cfg.output_dir, stem)) std::cout << "wrote " << path.string() << '\n';
  for (const EstimatorReport& r : rec.reports) {
    std::cout << r.quantity << " = " << format_double(r.estimate) << " [" << format_double(r.ci_low) << ", "
              << format_double(r.ci_high) << "], bound " << format_double(r.bound);
    if (r.conjecture_violated) std::cout << (*r.conjecture_violated ? " (conjecture violated)" : "");
    std::cout << '\n';
  }
  for (const auto& [name, value] : rec.metrics) std::cout << name << " = " << format_double(value) << '\n';
  std::cout << "seed " << rec.seed << ", config hash " << rec.config_hash << '\n';
  const int code = exit_code(rec);
  if (code == kExitBoundViolation) std::cerr << "levelstat: bound violated\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and exact checks of eigenvalue statistics for random Schroedinger operators"};
  app.set_version_flag("--version", std::string(levelstat::kVersion));
  app.require_subcommand(1);

  Flags flags;
  std::optional<levelstat::ExperimentKind> chosen;
  for (const levelstat::ExperimentKind kind : levelstat::all_experiments()) {
    CLI::App* sub = app.add_subcommand(std::string(levelstat::experiment_name(kind)));
    sub->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Seed override (takes precedence over LEVELSTAT_SEED and the config)");
    sub->add_option("--threads", flags.threads, "Worker threads, 0 = all cores; never changes results");
    sub->add_option("--out", flags.out, "Output directory (default: output.dir from the config, else .)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : levelstat::kExitError;
  }

  try {
    return execute(*chosen, flags);
  } catch (const levelstat::BoundViolation& e) {
    std::cerr << "levelstat: " << e.what() << '\n';
    return levelstat::kExitBoundViolation;
  } catch (const std::exception& e) {
    std::cerr << "levelstat: " << e.what() << '\n';
    return levelstat::kExitError;
  }
}
