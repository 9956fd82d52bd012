#pragma once

#include "anchorloc/pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace anchorloc {

struct SweepMethodSpec {
  enum class Kind { Init, Nominal, Anchor, GroundTruth };
  Kind kind = Kind::Anchor;
  int anchor_count = 0;  // Anchor only; 0 keeps all
  std::string label;
};

struct SweepPerturbation {
  std::string name;
  PerturbationSpec spec;
};

// How perturbation signs are chosen per cell. AverageBoth runs every seed
// once with all signs forced positive and once negative and averages the two
// passes' metrics; Random leaves the per-camera draw to the simulator.
enum class SignPolicy { AverageBoth, Random, Positive, Negative };

struct SweepBatchVariant {
  int batch_size = 1;
  double rho = 0.0;
};

struct SweepSpec {
  SimulationSpec base;  // perturbation field unused; cells supply it
  std::vector<SweepPerturbation> perturbations;
  std::vector<double> pixel_sigmas;        // empty: keep base.noise.pixel_sigma
  std::vector<SweepBatchVariant> batches;  // empty: single {1, 0}
  std::vector<SweepMethodSpec> methods;
  std::vector<std::uint64_t> seeds;
  double lambda = kDefaultWeightLambda;
  SignPolicy sign_policy = SignPolicy::AverageBoth;
  SolverConfig solver;
};

SweepSpec load_sweep_spec(const std::string& path);

struct SweepCell {
  std::string perturbation_name;
  PerturbationSpec perturbation;
  double pixel_sigma = 0.0;
  SweepBatchVariant batch;

  std::string key() const;  // filesystem-safe, unique within a sweep
};

struct SweepCellResult {
  SweepCell cell;
  struct PerMethod {
    SweepMethodSpec method;
    MetricsReport metrics;           // seed-averaged
    double seed_std_of_average = 0;  // spread of average_distance across seeds
    int n_seeds = 0;
  };
  std::vector<PerMethod> methods;
};

// Simulates, perturbs, localizes with every method and evaluates, for every
// seed (and both sign passes under AverageBoth), entirely in memory.
SweepCellResult run_sweep_cell(const SimulationSpec& base,
                               const SweepCell& cell,
                               const std::vector<SweepMethodSpec>& methods,
                               const std::vector<std::uint64_t>& seeds,
                               double lambda,
                               const SolverConfig& solver,
                               SignPolicy sign_policy);

struct SweepOptions {
  std::string out_dir;
  int jobs = 1;
  bool dry_run = false;  // list cell keys, write nothing
};

// Materializes the cell grid (perturbations x pixel_sigmas x batches), runs
// cells (resuming from existing cells/*.json), and writes sweep.csv with one
// row per cell and method.
void run_sweep(const SweepSpec& spec, const SweepOptions& options);
void run_sweep_file(const std::string& spec_path, const SweepOptions& options);

}  // namespace anchorloc
