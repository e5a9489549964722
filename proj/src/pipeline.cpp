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

#include "gaussocc/pipeline.hpp"

#include <set>

#include "gaussocc/errors.hpp"
#include "gaussocc/grid_sampler.hpp"
#include "gaussocc/parallel.hpp"
#include "gaussocc/random.hpp"

namespace gaussocc {
namespace {

using io::Json;

// Decorrelates the depth-noise stream from the scene and sampling seeds.
constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ULL;

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (...) {
    std::string msg = "unknown error";
    try {
      throw;
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    throw StageError(name, std::current_exception(), std::string("stage '") + name + "' failed: " + msg);
  }
}

std::vector<double> field_probs(const SemanticOccupancyField& f) { return {f.probs.begin(), f.probs.end()}; }

}  // namespace

RefineMode parse_refine_mode(const std::string& s) {
  if (s == "off") return RefineMode::kOff;
  if (s == "zero") return RefineMode::kZero;
  if (s == "oracle-snap") return RefineMode::kOracleSnap;
  throw ConfigError("refine mode must be one of off, zero, oracle-snap; got '" + s + "'");
}

std::string to_string(RefineMode m) {
  switch (m) {
    case RefineMode::kOff:
      return "off";
    case RefineMode::kZero:
      return "zero";
    case RefineMode::kOracleSnap:
      return "oracle-snap";
  }
  return "off";
}

void PipelineConfig::validate() const {
  if (rig_preset != "surround6") throw ConfigError("unknown rig preset '" + rig_preset + "'");
  if (downsample == 0) throw ConfigError("downsample ratio must be positive");
  if (rig.width % downsample != 0 || rig.height % downsample != 0) {
    throw ConfigError("rig image size is not divisible by the downsample ratio");
  }
  if (!(depth_noise >= 0.0)) throw ConfigError("depth noise must be nonnegative");
  if (attributes.mode != "class" && attributes.mode != "constant") {
    throw ConfigError("attribute mode must be 'class' or 'constant'");
  }
  if (!(attributes.scale >= kScaleFloor)) throw ConfigError("attribute scale is below the scale floor");
  if (!(attributes.opacity >= 0.0f && attributes.opacity <= 1.0f)) throw ConfigError("opacity must lie in [0, 1]");
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  if (!(grid_size > 0.0)) throw ConfigError("grid size must be positive");
  if (render_cutoff != kKernelCutoff) throw ConfigError("only a render cutoff of 3 is supported");
  if (ray_stride == 0) throw ConfigError("ray stride must be positive");
  if (ray_thresholds.empty()) throw ConfigError("at least one ray threshold is required");
  for (double t : ray_thresholds) {
    if (!(t >= 0.0)) throw ConfigError("ray thresholds must be nonnegative");
  }
  if (threads < 0) throw ConfigError("thread count must be nonnegative");
  if (scene_file && !std::filesystem::exists(*scene_file)) {
    throw ConfigError("scene file " + scene_file->string() + " does not exist");
  }
  if (basis_file && !std::filesystem::exists(*basis_file)) {
    throw ConfigError("basis file " + basis_file->string() + " does not exist");
  }
}

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig c) {
  check_keys(j,
             {"seed", "scene", "scene_file", "rig", "downsample", "depth_noise", "attributes", "voxel_size",
              "grid_size", "refine", "basis_file", "render_cutoff", "losses", "metrics", "dump_probs", "threads",
              "out"},
             "pipeline config");
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scene")) {
      check_keys(j["scene"],
                 {"num_boxes", "num_classes", "extent_min", "extent_max", "ground", "min_half_extent",
                  "max_half_extent", "max_half_height", "clear_radius", "snap"},
                 "scene");
      c.scene = io::scene_config_from_json(j["scene"], c.scene);
    }
    if (j.contains("scene_file")) c.scene_file = j["scene_file"].get<std::string>();
    if (j.contains("rig")) {
      const Json& r = j["rig"];
      check_keys(r, {"preset", "width", "height", "hfov_deg", "pitch_deg", "position"}, "rig");
      if (r.contains("preset")) c.rig_preset = r["preset"].get<std::string>();
      if (r.contains("width")) c.rig.width = r["width"].get<std::uint32_t>();
      if (r.contains("height")) c.rig.height = r["height"].get<std::uint32_t>();
      if (r.contains("hfov_deg")) c.rig.hfov_deg = r["hfov_deg"].get<double>();
      if (r.contains("pitch_deg")) c.rig.pitch_deg = r["pitch_deg"].get<double>();
      if (r.contains("position")) {
        const auto p = r["position"].get<std::array<double, 3>>();
        c.rig.position = Vec3(p[0], p[1], p[2]);
      }
    }
    if (j.contains("downsample")) c.downsample = j["downsample"].get<std::uint32_t>();
    if (j.contains("depth_noise")) c.depth_noise = j["depth_noise"].get<double>();
    if (j.contains("attributes")) {
      const Json& a = j["attributes"];
      check_keys(a, {"mode", "scale", "opacity", "peak"}, "attributes");
      if (a.contains("mode")) c.attributes.mode = a["mode"].get<std::string>();
      if (a.contains("scale")) c.attributes.scale = a["scale"].get<float>();
      if (a.contains("opacity")) c.attributes.opacity = a["opacity"].get<float>();
      if (a.contains("peak")) c.attributes.peak = a["peak"].get<float>();
    }
    if (j.contains("voxel_size")) c.voxel_size = j["voxel_size"].get<double>();
    if (j.contains("grid_size")) c.grid_size = j["grid_size"].get<double>();
    if (j.contains("refine")) c.refine = parse_refine_mode(j["refine"].get<std::string>());
    if (j.contains("basis_file")) c.basis_file = j["basis_file"].get<std::string>();
    if (j.contains("render_cutoff")) c.render_cutoff = j["render_cutoff"].get<double>();
    if (j.contains("losses")) {
      const Json& l = j["losses"];
      check_keys(l, {"occ", "depth", "alpha_unc"}, "losses");
      if (l.contains("occ")) c.losses.occ = l["occ"].get<double>();
      if (l.contains("depth")) c.losses.depth = l["depth"].get<double>();
      if (l.contains("alpha_unc")) c.losses.alpha_unc = l["alpha_unc"].get<double>();
    }
    if (j.contains("metrics")) {
      const Json& m = j["metrics"];
      check_keys(m, {"ray_stride", "ray_thresholds"}, "metrics");
      if (m.contains("ray_stride")) c.ray_stride = m["ray_stride"].get<std::uint32_t>();
      if (m.contains("ray_thresholds")) c.ray_thresholds = m["ray_thresholds"].get<std::vector<double>>();
    }
    if (j.contains("dump_probs")) c.dump_probs = j["dump_probs"].get<bool>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json j = {{"seed", c.seed},
            {"scene", io::to_json(c.scene)},
            {"rig",
             {{"preset", c.rig_preset},
              {"width", c.rig.width},
              {"height", c.rig.height},
              {"hfov_deg", c.rig.hfov_deg},
              {"pitch_deg", c.rig.pitch_deg},
              {"position", {c.rig.position.x(), c.rig.position.y(), c.rig.position.z()}}}},
            {"downsample", c.downsample},
            {"depth_noise", c.depth_noise},
            {"attributes",
             {{"mode", c.attributes.mode},
              {"scale", c.attributes.scale},
              {"opacity", c.attributes.opacity},
              {"peak", c.attributes.peak}}},
            {"voxel_size", c.voxel_size},
            {"grid_size", c.grid_size},
            {"refine", to_string(c.refine)},
            {"render_cutoff", c.render_cutoff},
            {"losses", {{"occ", c.losses.occ}, {"depth", c.losses.depth}, {"alpha_unc", c.losses.alpha_unc}}},
            {"metrics", {{"ray_stride", c.ray_stride}, {"ray_thresholds", c.ray_thresholds}}},
            {"dump_probs", c.dump_probs},
            {"threads", c.threads},
            {"out", c.out_dir.string()}};
  if (c.scene_file) j["scene_file"] = c.scene_file->string();
  if (c.basis_file) j["basis_file"] = c.basis_file->string();
  return j;
}

SceneSpec pipeline_scene(const PipelineConfig& c) {
  if (c.scene_file) return io::scene_from_json(io::read_json(*c.scene_file));
  return generate_scene(c.seed, c.scene);
}

std::vector<CameraModel> pipeline_cameras(const PipelineConfig& c) {
  if (c.rig_preset != "surround6") throw ConfigError("unknown rig preset '" + c.rig_preset + "'");
  return surround6(c.rig);
}

AttributeProvider pipeline_attributes(const PipelineConfig& c, const SceneSpec& scene,
                                      std::span<const CameraModel> depth_cams) {
  if (c.attributes.mode == "constant") {
    return constant_attributes(scene.num_classes, c.attributes.scale, c.attributes.opacity);
  }
  if (depth_cams.empty()) return constant_attributes(scene.num_classes, c.attributes.scale, c.attributes.opacity);
  return class_map_attributes(render_class_maps(scene, depth_cams), depth_cams.front().width, scene.num_classes,
                              c.attributes.scale, c.attributes.opacity, c.attributes.peak);
}

OffsetBasis pipeline_basis(const PipelineConfig& c) {
  if (c.basis_file) return load_basis(*c.basis_file);
  return OffsetBasis::axis_aligned(0.5 * c.grid_size);
}

GaussianSet refine_stage(const GaussianSet& sampled, RefineMode mode, const OffsetBasis& basis,
                         const SceneSpec* scene) {
  switch (mode) {
    case RefineMode::kOff:
      return sampled;
    case RefineMode::kZero:
      return refine_positions(sampled, basis, zero_weights(basis.size())(sampled));
    case RefineMode::kOracleSnap: {
      if (!scene) throw ConfigError("oracle-snap refinement needs the scene");
      const SceneSpec s = *scene;
      const auto provider = snap_weights([s](const Vec3& p) { return nearest_surface_point(s, p); }, basis);
      return refine_positions(sampled, basis, provider(sampled));
    }
  }
  return sampled;
}

LossReport evaluate_losses(const SemanticOccupancyField& field, const OccupancyGrid& gt,
                           std::span<const DepthMap> pred_depths, std::span<const DepthMap> gt_depths,
                           const LossWeights& weights) {
  if (!(field.geometry == gt.geometry) || field.num_classes != gt.num_classes) {
    throw ShapeError("rendered field and ground truth differ in shape");
  }
  std::vector<int> targets(gt.labels.size());
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    targets[i] = gt.labels[i] == kUnknownLabel ? -1 : static_cast<int>(channel_of_label(gt.labels[i], gt.num_classes));
  }
  const std::vector<double> probs = field_probs(field);
  const double ce = cross_entropy_loss(probs, field.channels(), targets);
  const double lov = lovasz_softmax_loss(probs, field.channels(), targets);
  DepthLossBreakdown depth;
  if (!pred_depths.empty()) depth = depth_uncertainty_loss(pred_depths, gt_depths, weights.alpha_unc);
  return make_loss_report(ce, lov, depth, weights);
}

Json to_json(const PipelineSummary& s) {
  auto nf = [](const NearFarCounts& c) { return Json{{"near", c.near}, {"far", c.far}}; };
  return {{"counts",
           {{"init", s.init_count}, {"sampled", s.sampled_count}, {"refined", s.refined_count}}},
          {"near_far_radius", kNearRadius},
          {"init_near_far", nf(s.init_near_far)},
          {"sampled_near_far", nf(s.sampled_near_far)},
          {"metrics", io::to_json(s.metrics)},
          {"losses", io::to_json(s.losses)}};
}

PipelineSummary run_pipeline(const PipelineConfig& config) {
  run_stage("config", [&] { config.validate(); });
  std::optional<parallel::ScopedThreadCount> threads;
  if (config.threads > 0) threads.emplace(config.threads);

  const auto& out = config.out_dir;
  run_stage("config", [&] { std::filesystem::create_directories(out); });
  PipelineSummary summary;

  SceneSpec scene;
  std::vector<CameraModel> cams, depth_cams;
  GridGeometry geometry;
  OccupancyGrid gt;
  run_stage("scene", [&] {
    scene = pipeline_scene(config);
    cams = pipeline_cameras(config);
    for (const auto& c : cams) depth_cams.push_back(c.downsampled(config.downsample));
    geometry = scene_grid(scene, config.voxel_size);
    gt = rasterize_gt_grid(scene, geometry);
    write_atomically(out / "scene.json", [&](const auto& p) { io::write_json(io::to_json(scene), p); });
    write_atomically(out / "cameras.json", [&](const auto& p) { io::write_json(io::cameras_to_json(cams), p); });
    write_atomically(out / "gt.occ", [&](const auto& p) { io::write_occ(gt, p); });
  });

  std::vector<DepthMap> clean, depths;
  run_stage("depth", [&] {
    clean = render_depth_maps(scene, depth_cams);
    if (config.depth_noise > 0.0) {
      depths = render_depth_maps(scene, depth_cams, {config.depth_noise, splitmix64(config.seed ^ kNoiseSalt)});
    } else {
      depths = clean;
    }
    for (std::size_t v = 0; v < depths.size(); ++v) {
      write_atomically(out / ("depth_" + std::to_string(v) + ".dpm"), [&](const auto& p) { io::write_dpm(depths[v], p); });
    }
  });

  GaussianSet init;
  run_stage("init", [&] {
    init = init_gaussians(depth_cams, depths, pipeline_attributes(config, scene, depth_cams), scene.num_classes);
    write_atomically(out / "gaussians_init.gsb", [&](const auto& p) { io::write_gsb(init, p); });
  });

  GaussianSet sampled;
  run_stage("sample", [&] {
    const VoxelGridSpec spec(scene.extent_min, scene.extent_max, config.grid_size);
    sampled = sample_representatives(init, spec, config.seed);
    write_atomically(out / "gaussians_sampled.gsb", [&](const auto& p) { io::write_gsb(sampled, p); });
  });

  GaussianSet refined;
  run_stage("refine", [&] {
    refined = refine_stage(sampled, config.refine, pipeline_basis(config), &scene);
    write_atomically(out / "gaussians_refined.gsb", [&](const auto& p) { io::write_gsb(refined, p); });
  });

  SemanticOccupancyField field;
  run_stage("render", [&] {
    field = render_grid(refined, geometry);
    write_atomically(out / "pred.occ",
                     [&](const auto& p) { io::write_occ(field.labels, p, config.dump_probs ? &field.probs : nullptr); });
  });

  run_stage("metrics", [&] {
    MetricReport& m = summary.metrics;
    m.occupancy = iou_miou(field.labels, gt);
    m.rays = ray_iou(field.labels, gt, cams, config.ray_thresholds, config.ray_stride);
    m.init = init_quality(init, gt);
    write_atomically(out / "metrics.json", [&](const auto& p) { io::write_json(io::to_json(m), p); });
  });

  run_stage("losses", [&] {
    summary.losses = evaluate_losses(field, gt, depths, clean, config.losses);
    write_atomically(out / "losses.json", [&](const auto& p) { io::write_json(io::to_json(summary.losses), p); });
  });

  summary.init_count = init.size();
  summary.sampled_count = sampled.size();
  summary.refined_count = refined.size();
  summary.init_near_far = near_far_counts(init, config.rig.position, kNearRadius);
  summary.sampled_near_far = near_far_counts(sampled, config.rig.position, kNearRadius);
  run_stage("summary", [&] {
    write_atomically(out / "summary.json", [&](const auto& p) { io::write_json(to_json(summary), p); });
  });
  return summary;
}

}  // namespace gaussocc
