#include "anchorloc/sweep.hpp"

#include "anchorloc/initializer.hpp"
#include "anchorloc/logging.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>

namespace anchorloc {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

std::string method_label(const SweepMethodSpec& method) {
  if (!method.label.empty()) return method.label;
  switch (method.kind) {
    case SweepMethodSpec::Kind::Init: return "init";
    case SweepMethodSpec::Kind::Nominal: return "nominal";
    case SweepMethodSpec::Kind::GroundTruth: return "ground_truth";
    case SweepMethodSpec::Kind::Anchor: break;
  }
  return method.anchor_count > 0 ? "anchor" + std::to_string(method.anchor_count) : "anchor";
}

std::string kind_name(SweepMethodSpec::Kind kind) {
  switch (kind) {
    case SweepMethodSpec::Kind::Init: return "init";
    case SweepMethodSpec::Kind::Nominal: return "nominal";
    case SweepMethodSpec::Kind::GroundTruth: return "ground_truth";
    case SweepMethodSpec::Kind::Anchor: break;
  }
  return "anchor";
}

SweepMethodSpec::Kind kind_from_name(const std::string& name, const std::string& path) {
  if (name == "init") return SweepMethodSpec::Kind::Init;
  if (name == "nominal") return SweepMethodSpec::Kind::Nominal;
  if (name == "anchor") return SweepMethodSpec::Kind::Anchor;
  if (name == "ground_truth") return SweepMethodSpec::Kind::GroundTruth;
  throw ParseError(path + ": unknown method kind '" + name + "'");
}

// exact pooling of breakdown moments, as if all frames were evaluated at once
struct Moments {
  double n = 0.0, sum = 0.0, sum_sq = 0.0, improved = 0.0;

  void add(const MetricsBreakdown& b) {
    n += b.n_frames;
    sum += b.n_frames * b.average_distance;
    sum_sq += b.n_frames * (b.distance_std * b.distance_std +
                            b.average_distance * b.average_distance);
    improved += b.n_frames * b.improvement_ratio;
  }

  MetricsBreakdown finish() const {
    MetricsBreakdown out;
    out.n_frames = static_cast<int>(n + 0.5);
    if (n <= 0.0) return out;
    out.average_distance = sum / n;
    out.distance_std =
        std::sqrt(std::max(0.0, sum_sq / n - out.average_distance * out.average_distance));
    out.improvement_ratio = improved / n;
    return out;
  }
};

struct ReportPool {
  Moments overall, single, multi;
  std::map<int, Moments> per_target;

  void add(const MetricsReport& report) {
    MetricsBreakdown top;
    top.n_frames = report.n_frames;
    top.average_distance = report.average_distance;
    top.distance_std = report.distance_std;
    top.improvement_ratio = report.improvement_ratio;
    overall.add(top);
    single.add(report.single_camera);
    multi.add(report.multi_camera);
    for (const auto& [target, b] : report.per_target) per_target[target].add(b);
  }

  MetricsReport finish() const {
    MetricsReport out;
    MetricsBreakdown top = overall.finish();
    out.n_frames = top.n_frames;
    out.average_distance = top.average_distance;
    out.distance_std = top.distance_std;
    out.improvement_ratio = top.improvement_ratio;
    out.single_camera = single.finish();
    out.multi_camera = multi.finish();
    for (const auto& [target, m] : per_target) out.per_target[target] = m.finish();
    return out;
  }
};

struct SimData {
  SimulationSpec spec;  // derived for this seed and pixel sigma
  std::vector<GroundTruthTrajectory> trajectories;
  std::vector<FrameObservations> observations;
  AnchorSet anchors;
};

SimData make_sim(const SimulationSpec& base, double pixel_sigma, std::uint64_t seed) {
  SimData sim;
  sim.spec = base;
  sim.spec.scene.rng_seed = mix_seed(base.scene.rng_seed, seed);
  sim.spec.noise.pixel_sigma = pixel_sigma;
  sim.spec.perturbation.reset();

  sim.trajectories =
      simulate_trajectories(sim.spec.scene, sim.spec.n_targets, sim.spec.n_frames,
                            sim.spec.step_sigma, sim.spec.sim_options);
  std::vector<Anchor> anchors;
  for (const CameraParams& camera : sim.spec.scene.cameras) {
    std::vector<Anchor> sampled = sample_anchors(
        sim.spec.scene, camera, sim.spec.scene.anchors_per_camera,
        sim.spec.noise.anchor_pixel_sigma,
        anchor_stream_seed(sim.spec.scene.rng_seed, camera.id), sim.spec.sim_options);
    anchors.insert(anchors.end(), sampled.begin(), sampled.end());
  }
  sim.anchors = AnchorSet(anchors);
  sim.observations = render_observations(sim.trajectories, sim.spec.scene.cameras,
                                         sim.spec.noise, sim.spec.representative,
                                         sim.spec.scene.rng_seed);
  return sim;
}

TargetHeights heights_from(const std::vector<GroundTruthTrajectory>& trajectories) {
  TargetHeights heights;
  for (const auto& traj : trajectories) heights.by_target[traj.target_id] = traj.height;
  return heights;
}

// metrics of every method under one signed perturbation draw
std::vector<MetricsReport> run_pass(const SimData& sim, const PerturbationSpec& signed_pert,
                                    const std::vector<SweepMethodSpec>& methods,
                                    const SweepBatchVariant& batch, double lambda,
                                    const SolverConfig& solver) {
  const std::vector<CameraParams> perturbed =
      perturb_cameras(sim.spec.scene.cameras, signed_pert, sim.spec.scene.rng_seed);
  const TargetHeights heights = heights_from(sim.trajectories);

  std::vector<MetricsReport> out;
  out.reserve(methods.size());
  for (const SweepMethodSpec& method : methods) {
    std::vector<EvalRow> rows;

    if (method.kind == SweepMethodSpec::Kind::Init) {
      for (const FrameObservations& frame : sim.observations) {
        const double plane_height = frame.representative == Representative::Head
                                        ? heights.height_for(frame.target_id)
                                        : 0.0;
        Position3D init;
        try {
          init = initial_estimate(frame, perturbed, plane_height).position;
        } catch (const NoVisibleCamera&) {
          continue;
        }
        EvalRow row;
        row.estimate = init;
        row.initial = init;
        row.truth = representative_point(sim.trajectories[frame.target_id],
                                         frame.frame_index, frame.representative);
        row.target_id = frame.target_id;
        row.n_visible = frame.visible_count();
        rows.push_back(row);
      }
    } else {
      Dataset dataset;
      dataset.cameras =
          method.kind == SweepMethodSpec::Kind::GroundTruth ? sim.spec.scene.cameras
                                                            : perturbed;
      dataset.init_cameras = perturbed;
      dataset.anchors = sim.anchors;
      dataset.observations = sim.observations;

      LocalizeSettings settings;
      settings.mode = method.kind == SweepMethodSpec::Kind::Anchor ? Mode::Anchor
                                                                   : Mode::Nominal;
      settings.anchor_limit =
          method.kind == SweepMethodSpec::Kind::Anchor ? method.anchor_count : 0;
      settings.lambda = lambda;
      settings.smoothing.batch_size = batch.batch_size;
      settings.smoothing.rho = batch.rho;
      settings.solver = solver;
      settings.heights = heights;

      LocalizeOutput result = localize_dataset(dataset, settings);
      rows.reserve(result.frames.size());
      for (const LocalizedFrame& frame : result.frames) {
        EvalRow row;
        row.estimate = frame.estimate;
        row.initial = frame.initial;
        row.truth = representative_point(sim.trajectories[frame.target_id],
                                         frame.frame_index,
                                         sim.spec.representative);
        row.target_id = frame.target_id;
        row.n_visible = frame.n_visible;
        rows.push_back(row);
      }
    }
    out.push_back(evaluate(rows));
  }
  return out;
}

}  // namespace

std::string SweepCell::key() const {
  return sanitize(perturbation_name) + "__sig" + format_g9(pixel_sigma) + "__T" +
         std::to_string(batch.batch_size) + "__rho" + format_g9(batch.rho);
}

SweepCellResult run_sweep_cell(const SimulationSpec& base, const SweepCell& cell,
                               const std::vector<SweepMethodSpec>& methods,
                               const std::vector<std::uint64_t>& seeds, double lambda,
                               const SolverConfig& solver, SignPolicy sign_policy) {
  if (seeds.empty()) throw InvalidArgument("sweep needs at least one seed");
  if (methods.empty()) throw InvalidArgument("sweep needs at least one method");

  std::vector<ReportPool> pools(methods.size());
  std::vector<std::vector<double>> seed_averages(methods.size());

  for (std::uint64_t seed : seeds) {
    SimData sim = make_sim(base, cell.pixel_sigma, seed);

    std::vector<PerturbationSpec> passes;
    PerturbationSpec pert = cell.perturbation;
    switch (sign_policy) {
      case SignPolicy::AverageBoth:
        pert.sign_mode = SignMode::Positive;
        passes.push_back(pert);
        pert.sign_mode = SignMode::Negative;
        passes.push_back(pert);
        break;
      case SignPolicy::Random:
        pert.sign_mode = SignMode::Both;
        passes.push_back(pert);
        break;
      case SignPolicy::Positive:
        pert.sign_mode = SignMode::Positive;
        passes.push_back(pert);
        break;
      case SignPolicy::Negative:
        pert.sign_mode = SignMode::Negative;
        passes.push_back(pert);
        break;
    }

    std::vector<ReportPool> seed_pools(methods.size());
    for (const PerturbationSpec& signed_pert : passes) {
      std::vector<MetricsReport> reports =
          run_pass(sim, signed_pert, methods, cell.batch, lambda, solver);
      for (size_t m = 0; m < methods.size(); ++m) seed_pools[m].add(reports[m]);
    }
    for (size_t m = 0; m < methods.size(); ++m) {
      MetricsReport seed_report = seed_pools[m].finish();
      seed_averages[m].push_back(seed_report.average_distance);
      pools[m].add(seed_report);
    }
  }

  SweepCellResult result;
  result.cell = cell;
  result.methods.resize(methods.size());
  for (size_t m = 0; m < methods.size(); ++m) {
    auto& entry = result.methods[m];
    entry.method = methods[m];
    entry.metrics = pools[m].finish();
    entry.n_seeds = static_cast<int>(seeds.size());
    double mean = 0.0;
    for (double v : seed_averages[m]) mean += v;
    mean /= seed_averages[m].size();
    double var = 0.0;
    for (double v : seed_averages[m]) var += (v - mean) * (v - mean);
    entry.seed_std_of_average = std::sqrt(var / seed_averages[m].size());
  }
  return result;
}

namespace {

std::string sign_policy_name(SignPolicy policy) {
  switch (policy) {
    case SignPolicy::AverageBoth: return "AVERAGE_BOTH";
    case SignPolicy::Random: return "RANDOM";
    case SignPolicy::Positive: return "POSITIVE";
    case SignPolicy::Negative: return "NEGATIVE";
  }
  return "AVERAGE_BOTH";
}

SignPolicy sign_policy_from(const std::string& name, const std::string& path) {
  if (name == "AVERAGE_BOTH") return SignPolicy::AverageBoth;
  if (name == "RANDOM") return SignPolicy::Random;
  if (name == "POSITIVE") return SignPolicy::Positive;
  if (name == "NEGATIVE") return SignPolicy::Negative;
  throw ParseError(path + ": unknown sign policy '" + name + "'");
}

ordered_json cell_result_to_json(const SweepCellResult& result) {
  ordered_json methods = ordered_json::array();
  for (const auto& entry : result.methods) {
    methods.push_back(ordered_json{{"label", method_label(entry.method)},
                                   {"kind", kind_name(entry.method.kind)},
                                   {"anchor_count", entry.method.anchor_count},
                                   {"n_seeds", entry.n_seeds},
                                   {"seed_std_of_average", entry.seed_std_of_average},
                                   {"metrics", metrics_to_json(entry.metrics)}});
  }
  return ordered_json{{"key", result.cell.key()},
                      {"perturbation_name", result.cell.perturbation_name},
                      {"rx_deg", result.cell.perturbation.rx_deg},
                      {"ry_deg", result.cell.perturbation.ry_deg},
                      {"t_m", result.cell.perturbation.t_m},
                      {"d_rel", result.cell.perturbation.d_rel},
                      {"pixel_sigma", result.cell.pixel_sigma},
                      {"batch_size", result.cell.batch.batch_size},
                      {"rho", result.cell.batch.rho},
                      {"methods", std::move(methods)}};
}

SweepCellResult cell_result_from_json(const ordered_json& j, const SweepCell& cell,
                                      const std::string& origin) {
  SweepCellResult result;
  result.cell = cell;
  const ordered_json& methods = require_key(j, "methods", origin);
  if (!methods.is_array()) throw ParseError(origin + "/methods: expected an array");
  for (size_t m = 0; m < methods.size(); ++m) {
    const std::string path = origin + "/methods/" + std::to_string(m);
    SweepCellResult::PerMethod entry;
    entry.method.kind =
        kind_from_name(require_string(require_key(methods[m], "kind", path), path + "/kind"),
                       path + "/kind");
    entry.method.anchor_count =
        require_int(require_key(methods[m], "anchor_count", path), path + "/anchor_count");
    entry.method.label =
        require_string(require_key(methods[m], "label", path), path + "/label");
    entry.n_seeds = require_int(require_key(methods[m], "n_seeds", path), path + "/n_seeds");
    entry.seed_std_of_average = require_number(
        require_key(methods[m], "seed_std_of_average", path), path + "/seed_std_of_average");
    entry.metrics =
        metrics_from_json(require_key(methods[m], "metrics", path), path + "/metrics");
    result.methods.push_back(std::move(entry));
  }
  return result;
}

}  // namespace

SweepSpec load_sweep_spec(const std::string& path) {
  ordered_json root = parse_json_text(read_text_file(path), path);
  SweepSpec spec;

  if (root.contains("scene")) {
    spec.base = parse_simulation_spec(root["scene"].dump(), path + "/scene");
  } else if (root.contains("scene_path")) {
    fs::path scene_path(require_string(root["scene_path"], path + "/scene_path"));
    if (scene_path.is_relative()) scene_path = fs::path(path).parent_path() / scene_path;
    spec.base = load_simulation_spec(scene_path.string());
  } else {
    throw ParseError(path + ": needs either 'scene' or 'scene_path'");
  }

  const ordered_json& perts = require_key(root, "perturbations", path);
  if (!perts.is_array() || perts.empty())
    throw ParseError(path + "/perturbations: expected a non-empty array");
  for (size_t i = 0; i < perts.size(); ++i) {
    const std::string ppath = path + "/perturbations/" + std::to_string(i);
    SweepPerturbation p;
    p.name = require_string(require_key(perts[i], "name", ppath), ppath + "/name");
    p.spec.rx_deg = number_or(perts[i], "rx_deg", 0.0, ppath);
    p.spec.ry_deg = number_or(perts[i], "ry_deg", 0.0, ppath);
    p.spec.t_m = number_or(perts[i], "t_m", 0.0, ppath);
    p.spec.d_rel = number_or(perts[i], "d_rel", 0.0, ppath);
    spec.perturbations.push_back(std::move(p));
  }

  if (root.contains("pixel_sigmas")) {
    for (size_t i = 0; i < root["pixel_sigmas"].size(); ++i)
      spec.pixel_sigmas.push_back(
          require_number(root["pixel_sigmas"][i], path + "/pixel_sigmas"));
  }
  if (root.contains("batches")) {
    for (size_t i = 0; i < root["batches"].size(); ++i) {
      const std::string bpath = path + "/batches/" + std::to_string(i);
      SweepBatchVariant b;
      b.batch_size = int_or(root["batches"][i], "batch_size", 1, bpath);
      b.rho = number_or(root["batches"][i], "rho", 0.0, bpath);
      spec.batches.push_back(b);
    }
  }

  const ordered_json& methods = require_key(root, "methods", path);
  if (!methods.is_array() || methods.empty())
    throw ParseError(path + "/methods: expected a non-empty array");
  for (size_t i = 0; i < methods.size(); ++i) {
    const std::string mpath = path + "/methods/" + std::to_string(i);
    SweepMethodSpec m;
    m.kind = kind_from_name(require_string(require_key(methods[i], "kind", mpath),
                                           mpath + "/kind"),
                            mpath + "/kind");
    m.anchor_count = int_or(methods[i], "anchor_count", 0, mpath);
    m.label = string_or(methods[i], "label", "", mpath);
    spec.methods.push_back(std::move(m));
  }

  const ordered_json& seeds = require_key(root, "seeds", path);
  if (!seeds.is_array() || seeds.empty())
    throw ParseError(path + "/seeds: expected a non-empty array");
  for (size_t i = 0; i < seeds.size(); ++i)
    spec.seeds.push_back(static_cast<std::uint64_t>(
        require_int(seeds[i], path + "/seeds/" + std::to_string(i))));

  spec.lambda = number_or(root, "lambda", kDefaultWeightLambda, path);
  spec.sign_policy =
      sign_policy_from(string_or(root, "sign_policy", "AVERAGE_BOTH", path), path);
  if (root.contains("solver")) spec.solver = parse_solver_json(root["solver"], path + "/solver");
  return spec;
}

void run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  std::vector<double> sigmas = spec.pixel_sigmas;
  if (sigmas.empty()) sigmas.push_back(spec.base.noise.pixel_sigma);
  std::vector<SweepBatchVariant> batches = spec.batches;
  if (batches.empty()) batches.push_back(SweepBatchVariant{});

  std::vector<SweepCell> cells;
  for (const SweepPerturbation& pert : spec.perturbations) {
    for (double sigma : sigmas) {
      for (const SweepBatchVariant& batch : batches) {
        SweepCell cell;
        cell.perturbation_name = pert.name;
        cell.perturbation = pert.spec;
        cell.pixel_sigma = sigma;
        cell.batch = batch;
        cells.push_back(std::move(cell));
      }
    }
  }

  if (options.dry_run) {
    for (const SweepCell& cell : cells) std::printf("%s\n", cell.key().c_str());
    return;
  }
  if (options.out_dir.empty()) throw InvalidArgument("sweep needs an output directory");

  const fs::path out(options.out_dir);
  fs::create_directories(out / "cells");

  std::vector<SweepCellResult> results(cells.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t index = next.fetch_add(1);
      if (index >= cells.size()) return;
      {
        std::scoped_lock lock(error_mutex);
        if (first_error) return;
      }
      const SweepCell& cell = cells[index];
      const fs::path cell_path = out / "cells" / (cell.key() + ".json");
      try {
        bool loaded = false;
        if (fs::exists(cell_path)) {
          try {
            ordered_json j = parse_json_text(read_text_file(cell_path.string()),
                                             cell_path.string());
            results[index] = cell_result_from_json(j, cell, cell_path.string());
            loaded = true;
          } catch (const Error&) {
            // stale or truncated cell file; recompute
          }
        }
        if (!loaded) {
          results[index] = run_sweep_cell(spec.base, cell, spec.methods, spec.seeds,
                                          spec.lambda, spec.solver, spec.sign_policy);
          write_text_file(cell_path.string(),
                          cell_result_to_json(results[index]).dump(2) + "\n");
        }
        std::scoped_lock lock(log_mutex);
        log::info("sweep cell " + cell.key() + (loaded ? " (cached)" : " done"));
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (int i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::string csv =
      "cell,rx_deg,ry_deg,t_m,d_rel,pixel_sigma,batch_size,rho,method,anchor_count,"
      "n_seeds,n_frames,average_distance,distance_std,improvement_ratio,"
      "seed_std_of_average,single_n_frames,single_average_distance,multi_n_frames,"
      "multi_average_distance\n";
  for (const SweepCellResult& result : results) {
    for (const auto& entry : result.methods) {
      csv += result.cell.key() + "," + format_g9(result.cell.perturbation.rx_deg) + "," +
             format_g9(result.cell.perturbation.ry_deg) + "," +
             format_g9(result.cell.perturbation.t_m) + "," +
             format_g9(result.cell.perturbation.d_rel) + "," +
             format_g9(result.cell.pixel_sigma) + "," +
             std::to_string(result.cell.batch.batch_size) + "," +
             format_g9(result.cell.batch.rho) + "," + method_label(entry.method) + "," +
             std::to_string(entry.method.anchor_count) + "," +
             std::to_string(entry.n_seeds) + "," +
             std::to_string(entry.metrics.n_frames) + "," +
             format_g9(entry.metrics.average_distance) + "," +
             format_g9(entry.metrics.distance_std) + "," +
             format_g9(entry.metrics.improvement_ratio) + "," +
             format_g9(entry.seed_std_of_average) + "," +
             std::to_string(entry.metrics.single_camera.n_frames) + "," +
             format_g9(entry.metrics.single_camera.average_distance) + "," +
             std::to_string(entry.metrics.multi_camera.n_frames) + "," +
             format_g9(entry.metrics.multi_camera.average_distance) + "\n";
    }
  }
  write_text_file((out / "sweep.csv").string(), csv);

  ordered_json manifest{{"n_cells", cells.size()},
                        {"n_seeds", spec.seeds.size()},
                        {"sign_policy", sign_policy_name(spec.sign_policy)},
                        {"lambda", spec.lambda},
                        {"csv", "sweep.csv"}};
  write_text_file((out / "sweep_manifest.json").string(), manifest.dump(2) + "\n");
  log::info("sweep: " + std::to_string(cells.size()) + " cells -> " + options.out_dir);
}

void run_sweep_file(const std::string& spec_path, const SweepOptions& options) {
  run_sweep(load_sweep_spec(spec_path), options);
}

}  // namespace anchorloc
