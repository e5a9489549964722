/* Copyright 2026 The gaussocc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// gaussocc command-line driver.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaussocc/errors.hpp"
#include "gaussocc/grid_sampler.hpp"
#include "gaussocc/io.hpp"
#include "gaussocc/parallel.hpp"
#include "gaussocc/pipeline.hpp"
#include "gaussocc/reference/serial.hpp"

namespace fs = std::filesystem;
using namespace gaussocc;
using io::Json;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kStageFailure = 3, kUndefinedMetric = 4 };

// Flags shared by every subcommand. Unset flags leave the config untouched.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_size;
  std::optional<std::string> refine;
  std::optional<std::uint32_t> ray_stride;
  std::optional<int> threads;
  bool dump_probs = false;
  std::optional<std::string> out;
};

PipelineConfig resolve(const CommonFlags& f) {
  PipelineConfig c;
  if (!f.config.empty()) c = pipeline_config_from_json(io::read_json(f.config));
  if (f.seed) c.seed = *f.seed;
  if (f.grid_size) c.grid_size = *f.grid_size;
  if (f.refine) c.refine = parse_refine_mode(*f.refine);
  if (f.ray_stride) c.ray_stride = *f.ray_stride;
  if (f.threads) c.threads = *f.threads;
  if (f.dump_probs) c.dump_probs = true;
  if (f.out) c.out_dir = *f.out;
  c.validate();
  return c;
}

fs::path out_dir(const PipelineConfig& c) {
  fs::create_directories(c.out_dir);
  return c.out_dir;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<CameraModel> load_cameras(const std::string& path) { return io::cameras_from_json(io::read_json(path)); }

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const StageError& s) {
    return exit_code_for(s.cause());
  } catch (const ConfigError&) {
    return kConfigError;
  } catch (const CLI::Error&) {
    return kConfigError;
  } catch (const UndefinedMetricError&) {
    return kUndefinedMetric;
  } catch (...) {
    return kStageFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian semantic-occupancy pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--config", flags.config, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Seed for scene generation and sampling");
  app.add_option("--grid-size", flags.grid_size, "Sampling grid size s_g, meters");
  app.add_option("--refine", flags.refine, "Refinement mode: off, zero, oracle-snap");
  app.add_option("--ray-stride", flags.ray_stride, "Pixel stride for RayIoU rays");
  app.add_option("--threads", flags.threads, "Worker thread cap");
  app.add_flag("--dump-probs", flags.dump_probs, "Append the occupancy probabilities to .occ output");
  app.add_option("--out", flags.out, "Output directory");

  // gen-scene
  auto* gen = app.add_subcommand("gen-scene", "Generate a synthetic scene, its rig and ground-truth grid");
  std::optional<std::uint32_t> num_boxes;
  std::string rig_name = "surround6";
  gen->add_option("--num-boxes", num_boxes, "Number of boxes");
  gen->add_option("--rig", rig_name, "Camera rig preset");

  // render-depth
  auto* rdepth = app.add_subcommand("render-depth", "Ray-cast depth maps for a scene");
  std::string scene_path, cameras_path;
  std::optional<std::uint32_t> downsample;
  double noise = 0.0;
  rdepth->add_option("--scene", scene_path, "scene.json")->required()->check(CLI::ExistingFile);
  rdepth->add_option("--cameras", cameras_path, "Full-resolution cameras.json (default: rig preset)");
  rdepth->add_option("--downsample", downsample, "Downsample ratio r");
  rdepth->add_option("--noise", noise, "Depth noise std-dev, meters");

  // init
  auto* init = app.add_subcommand("init", "Unproject depth maps into pixel-aligned Gaussians");
  std::string depth_cams_path;
  std::vector<std::string> depth_files;
  std::string init_scene;
  init->add_option("--cameras", depth_cams_path, "depth_cameras.json")->required()->check(CLI::ExistingFile);
  init->add_option("--depth", depth_files, "DPM1 files, one per camera")->required()->check(CLI::ExistingFile);
  init->add_option("--scene", init_scene, "scene.json, for class attributes")->check(CLI::ExistingFile);

  // sample
  auto* sample = app.add_subcommand("sample", "Keep one representative Gaussian per sampling-grid voxel");
  std::string in_gsb, sample_scene;
  bool dry_run = false;
  sample->add_option("--in", in_gsb, "Input GSB1 file")->required()->check(CLI::ExistingFile);
  sample->add_option("--scene", sample_scene, "scene.json giving the grid extents")->required()->check(CLI::ExistingFile);
  sample->add_flag("--dry-run", dry_run, "Only count occupied voxels with the reference grouping");

  // refine
  auto* refine = app.add_subcommand("refine", "Apply basis-constrained positional refinement");
  std::string refine_in, refine_scene, basis_path;
  refine->add_option("--in", refine_in, "Input GSB1 file")->required()->check(CLI::ExistingFile);
  refine->add_option("--scene", refine_scene, "scene.json, required for oracle-snap")->check(CLI::ExistingFile);
  refine->add_option("--basis", basis_path, "Basis JSON (default: axis-aligned, reach s_g/2)")->check(CLI::ExistingFile);

  // render
  auto* render = app.add_subcommand("render", "Render Gaussians into a semantic occupancy grid");
  std::string render_in, render_grid_path, render_scene;
  render->add_option("--in", render_in, "Input GSB1 file")->required()->check(CLI::ExistingFile);
  render->add_option("--grid", render_grid_path, "OCC1 file supplying the target geometry")->check(CLI::ExistingFile);
  render->add_option("--scene", render_scene, "scene.json; grid covers its extents")->check(CLI::ExistingFile);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "IoU, mIoU, RayIoU and initialization quality");
  std::string pred_occ, gt_occ, metric_cams, metric_gs;
  std::vector<double> thresholds = kDefaultRayThresholds;
  metrics->add_option("--pred", pred_occ, "Predicted OCC1")->required()->check(CLI::ExistingFile);
  metrics->add_option("--gt", gt_occ, "Ground-truth OCC1")->required()->check(CLI::ExistingFile);
  metrics->add_option("--cameras", metric_cams, "cameras.json; enables RayIoU")->check(CLI::ExistingFile);
  metrics->add_option("--gaussians", metric_gs, "GSB1 for Perc./Dist.")->check(CLI::ExistingFile);
  metrics->add_option("--ray-thresholds", thresholds, "RayIoU distance thresholds, meters");

  // eval-loss
  auto* loss = app.add_subcommand("eval-loss", "Occupancy and depth losses");
  std::string loss_pred, loss_gt;
  std::vector<std::string> pred_depth, gt_depth;
  loss->add_option("--pred", loss_pred, "Predicted OCC1 with probability dump")->required()->check(CLI::ExistingFile);
  loss->add_option("--gt", loss_gt, "Ground-truth OCC1")->required()->check(CLI::ExistingFile);
  loss->add_option("--pred-depth", pred_depth, "Predicted DPM1 files")->check(CLI::ExistingFile);
  loss->add_option("--gt-depth", gt_depth, "Ground-truth DPM1 files")->check(CLI::ExistingFile);

  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");

  // bench
  auto* bench = app.add_subcommand("bench", "Time voxelize + sort + sample against the serial reference");
  std::size_t bench_count = 1000000;
  int bench_repeat = 3;
  bench->add_option("--count", bench_count, "Number of random Gaussians");
  bench->add_option("--repeat", bench_repeat, "Timed repetitions (best is reported)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  std::string stage = "config";
  try {
    const PipelineConfig cfg = resolve(flags);
    std::optional<parallel::ScopedThreadCount> threads;
    if (cfg.threads > 0) threads.emplace(cfg.threads);

    if (*gen) {
      stage = "gen-scene";
      PipelineConfig c = cfg;
      if (num_boxes) c.scene.num_boxes = *num_boxes;
      c.rig_preset = rig_name;
      c.validate();
      const auto dir = out_dir(c);
      const SceneSpec scene = pipeline_scene(c);
      const auto cams = pipeline_cameras(c);
      const auto grid = rasterize_gt_grid(scene, scene_grid(scene, c.voxel_size));
      write_atomically(dir / "scene.json", [&](const auto& p) { io::write_json(io::to_json(scene), p); });
      write_atomically(dir / "cameras.json", [&](const auto& p) { io::write_json(io::cameras_to_json(cams), p); });
      write_atomically(dir / "gt.occ", [&](const auto& p) { io::write_occ(grid, p); });
      print({{"boxes", scene.boxes.size()}, {"cameras", cams.size()}, {"voxels", grid.labels.size()}});
    } else if (*rdepth) {
      stage = "render-depth";
      const SceneSpec scene = io::scene_from_json(io::read_json(scene_path));
      const auto cams = cameras_path.empty() ? pipeline_cameras(cfg) : load_cameras(cameras_path);
      const std::uint32_t r = downsample.value_or(cfg.downsample);
      std::vector<CameraModel> depth_cams;
      for (const auto& c : cams) depth_cams.push_back(c.downsampled(r));
      const auto maps = render_depth_maps(scene, depth_cams, {noise, cfg.seed});
      const auto dir = out_dir(cfg);
      for (std::size_t v = 0; v < maps.size(); ++v) {
        write_atomically(dir / ("depth_" + std::to_string(v) + ".dpm"), [&](const auto& p) { io::write_dpm(maps[v], p); });
      }
      write_atomically(dir / "depth_cameras.json",
                       [&](const auto& p) { io::write_json(io::cameras_to_json(depth_cams), p); });
      print({{"maps", maps.size()}, {"height", depth_cams.front().height}, {"width", depth_cams.front().width}});
    } else if (*init) {
      stage = "init";
      const auto cams = load_cameras(depth_cams_path);
      std::vector<DepthMap> maps;
      for (const auto& f : depth_files) maps.push_back(io::read_dpm(f));
      SceneSpec scene;
      PipelineConfig c = cfg;
      if (init_scene.empty()) {
        c.attributes.mode = "constant";
        scene.num_classes = c.scene.num_classes;
      } else {
        scene = io::scene_from_json(io::read_json(init_scene));
      }
      const auto gs = init_gaussians(cams, maps, pipeline_attributes(c, scene, cams), scene.num_classes);
      write_atomically(out_dir(cfg) / "gaussians_init.gsb", [&](const auto& p) { io::write_gsb(gs, p); });
      print({{"gaussians", gs.size()}});
    } else if (*sample) {
      stage = "sample";
      const auto gs = io::read_gsb(in_gsb);
      const SceneSpec scene = io::scene_from_json(io::read_json(sample_scene));
      const VoxelGridSpec spec(scene.extent_min, scene.extent_max, cfg.grid_size);
      if (dry_run) {
        print({{"input", gs.size()}, {"occupied_voxels", reference::count_occupied_voxels(gs, spec)}});
      } else {
        const auto out = sample_representatives(gs, spec, cfg.seed);
        write_atomically(out_dir(cfg) / "gaussians_sampled.gsb", [&](const auto& p) { io::write_gsb(out, p); });
        print({{"input", gs.size()}, {"sampled", out.size()}});
      }
    } else if (*refine) {
      stage = "refine";
      const auto gs = io::read_gsb(refine_in);
      const OffsetBasis basis = basis_path.empty() ? OffsetBasis::axis_aligned(0.5 * cfg.grid_size) : load_basis(basis_path);
      std::optional<SceneSpec> scene;
      if (!refine_scene.empty()) scene = io::scene_from_json(io::read_json(refine_scene));
      if (cfg.refine == RefineMode::kOracleSnap && !scene) throw ConfigError("--refine oracle-snap needs --scene");
      const auto out = refine_stage(gs, cfg.refine, basis, scene ? &*scene : nullptr);
      write_atomically(out_dir(cfg) / "gaussians_refined.gsb", [&](const auto& p) { io::write_gsb(out, p); });
      print({{"gaussians", out.size()}, {"refine", to_string(cfg.refine)}});
    } else if (*render) {
      stage = "render";
      const auto gs = io::read_gsb(render_in);
      GridGeometry geometry;
      if (!render_grid_path.empty()) {
        geometry = io::read_occ(render_grid_path).grid.geometry;
      } else if (!render_scene.empty()) {
        geometry = scene_grid(io::scene_from_json(io::read_json(render_scene)), cfg.voxel_size);
      } else {
        throw ConfigError("render needs --grid or --scene");
      }
      const auto field = render_grid(gs, geometry);
      write_atomically(out_dir(cfg) / "pred.occ",
                       [&](const auto& p) { io::write_occ(field.labels, p, cfg.dump_probs ? &field.probs : nullptr); });
      std::size_t occupied = 0;
      for (std::size_t i = 0; i < field.labels.labels.size(); ++i) occupied += field.labels.occupied(i) ? 1 : 0;
      print({{"voxels", field.labels.labels.size()}, {"occupied", occupied}});
    } else if (*metrics) {
      stage = "metrics";
      const auto pred = io::read_occ(pred_occ).grid;
      const auto gt = io::read_occ(gt_occ).grid;
      MetricReport m;
      m.occupancy = iou_miou(pred, gt);
      if (!metric_cams.empty()) m.rays = ray_iou(pred, gt, load_cameras(metric_cams), thresholds, cfg.ray_stride);
      if (!metric_gs.empty()) m.init = init_quality(io::read_gsb(metric_gs), gt);
      const Json j = io::to_json(m);
      if (flags.out) write_atomically(out_dir(cfg) / "metrics.json", [&](const auto& p) { io::write_json(j, p); });
      print(j);
    } else if (*loss) {
      stage = "eval-loss";
      const auto pred = io::read_occ(loss_pred);
      const auto gt = io::read_occ(loss_gt).grid;
      if (pred.probs.empty()) throw ConfigError("predicted grid carries no probabilities; render with --dump-probs");
      if (pred_depth.size() != gt_depth.size()) throw ConfigError("--pred-depth and --gt-depth counts differ");
      SemanticOccupancyField field;
      field.geometry = pred.grid.geometry;
      field.num_classes = pred.grid.num_classes;
      field.probs = pred.probs;
      field.labels = pred.grid;
      std::vector<DepthMap> pd, gd;
      for (const auto& f : pred_depth) pd.push_back(io::read_dpm(f));
      for (const auto& f : gt_depth) gd.push_back(io::read_dpm(f));
      const Json j = io::to_json(evaluate_losses(field, gt, pd, gd, cfg.losses));
      if (flags.out) write_atomically(out_dir(cfg) / "losses.json", [&](const auto& p) { io::write_json(j, p); });
      print(j);
    } else if (*pipe) {
      stage = "pipeline";
      print(to_json(run_pipeline(cfg)));
    } else if (*bench) {
      stage = "bench";
      const Vec3 lo(-50.0, -50.0, -5.0), hi(50.0, 50.0, 3.0);
      const auto gs = random_gaussians(bench_count, lo, hi, cfg.seed, {0.1, 0.5, 4});
      const VoxelGridSpec spec(lo, hi, cfg.grid_size);
      auto best_of = [&](auto&& f) {
        double best = 1e300;
        std::size_t n = 0;
        for (int i = 0; i < bench_repeat; ++i) {
          const auto t0 = std::chrono::steady_clock::now();
          n = f();
          best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return std::make_pair(best, n);
      };
      const auto [par_s, par_n] = best_of([&] { return sample_representatives(gs, spec, cfg.seed).size(); });
      const auto [ser_s, ser_n] = best_of([&] { return reference::sample_representatives(gs, spec, cfg.seed).size(); });
      print({{"count", bench_count},
             {"threads", parallel::max_threads()},
             {"sampled", par_n},
             {"reference_sampled", ser_n},
             {"parallel_seconds", par_s},
             {"reference_seconds", ser_s},
             {"parallel_gaussians_per_second", double(bench_count) / par_s},
             {"reference_gaussians_per_second", double(bench_count) / ser_s}});
    }
    return kOk;
  } catch (const StageError& e) {
    std::cerr << "gaussocc: " << e.what() << '\n';
    return exit_code_for(std::current_exception());
  } catch (const std::exception& e) {
    std::cerr << "gaussocc: stage '" << stage << "' failed: " << e.what() << '\n';
    return exit_code_for(std::current_exception());
  }
}
