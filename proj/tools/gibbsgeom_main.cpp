#include "gibbsgeom/report.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gibbs point process sampling and stabilizing-score experiments"};
  gibbsgeom::CliOptions opt;
  app.add_option("kind", opt.kind,
                 "experiment kind: sample, variance-scan, clt-scan, sigma2, "
                 "tails, mismatch, probe, oracle-check")
      ->required();
  app.add_option("--config", opt.config_path, "run configuration file");
  app.add_option("--out", opt.out_dir,
                 "output directory (overrides GIBBSGEOM_OUT and out.dir)");
  auto* seed_opt = app.add_option(
      "--seed", opt.seed, "master seed (overrides GIBBSGEOM_SEED and mc.seed)");
  app.add_option("--threads", opt.threads, "worker threads (overrides mc.threads)");
  app.add_flag("--allow-near-critical", opt.allow_near_critical,
               "run even when the admissibility margin is >= 1");
  app.add_flag("--validate-only", opt.validate_only,
               "parse and validate the configuration, then exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  opt.has_seed = seed_opt->count() > 0;
  return gibbsgeom::run_cli(opt);
}
