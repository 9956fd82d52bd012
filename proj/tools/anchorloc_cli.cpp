// Command line front end. Talks to the engine exclusively through the
// shared library's C interface so it doubles as a smoke test for that
// boundary. Verbosity comes from the ANCHORLOC_LOG environment variable
// (off|info|debug), not from a flag.

#include <anchorloc/anchorloc.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>

namespace {

int report(anchorloc_status status) {
  if (status == ANCHORLOC_OK) return 0;
  std::fprintf(stderr, "anchorloc: error [%s]: %s\n",
               anchorloc_status_name(status), anchorloc_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchorloc: multi-camera pedestrian localization engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(anchorloc_version()));
  app.footer("Set ANCHORLOC_LOG=info or =debug for progress output on stderr.");

  std::string config;
  std::string out;
  std::string cameras;
  std::string estimates;
  std::string truth;
  std::string initials;
  std::string observations;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool dry_run = false;

  auto* sim = app.add_subcommand(
      "simulate", "Generate a synthetic dataset from a scene spec");
  sim->add_option("--config", config, "Scene spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output directory")->required();

  auto* pert = app.add_subcommand(
      "perturb", "Write a perturbed copy of a camera file");
  pert->add_option("--cameras", cameras, "Cameras JSON to perturb")
      ->required()
      ->check(CLI::ExistingFile);
  pert->add_option("--config", config, "Perturbation spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  pert->add_option("--seed", seed, "RNG seed for noise draws")
      ->default_val(std::uint64_t{0});
  pert->add_option("--out", out, "Output cameras JSON path")->required();

  auto* loc = app.add_subcommand(
      "localize", "Run the localizer over a dataset described by a run config");
  loc->add_option("--config", config, "Run config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  loc->add_option("--out", out,
                  "Output directory (overrides the config's out_dir)");

  auto* eva = app.add_subcommand(
      "evaluate", "Compare estimates against ground truth");
  eva->add_option("--estimates", estimates, "Estimates CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eva->add_option("--truth", truth, "Ground truth trajectories CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eva->add_option("--initials", initials, "Initial estimates CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eva->add_option("--observations", observations,
                  "Observations JSONL; enables the single/multi camera split")
      ->check(CLI::ExistingFile);
  eva->add_option("--out", out, "Metrics report JSON path")->required();

  auto* swp = app.add_subcommand(
      "sweep", "Run a perturbation/noise/batch sweep grid");
  swp->add_option("--config", config, "Sweep spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  swp->add_option("--out", out, "Output directory")->required();
  swp->add_option("--jobs", jobs, "Worker threads for sweep cells")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  swp->add_flag("--dry-run", dry_run, "List cells without running them");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed())
    return report(anchorloc_run_simulate(config.c_str(), out.c_str()));
  if (pert->parsed())
    return report(anchorloc_run_perturb(cameras.c_str(), config.c_str(), seed,
                                        out.c_str()));
  if (loc->parsed())
    return report(anchorloc_run_localize(
        config.c_str(), out.empty() ? nullptr : out.c_str()));
  if (eva->parsed())
    return report(anchorloc_run_evaluate(
        estimates.c_str(), truth.c_str(), initials.c_str(),
        observations.empty() ? nullptr : observations.c_str(), out.c_str()));
  if (swp->parsed())
    return report(anchorloc_run_sweep(config.c_str(), out.c_str(), jobs,
                                      dry_run ? 1 : 0));
  return 0;
}
