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

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gaussocc/initialization.hpp"
#include "gaussocc/io.hpp"
#include "gaussocc/metrics.hpp"
#include "gaussocc/objectives.hpp"
#include "gaussocc/refiner.hpp"
#include "gaussocc/renderer.hpp"
#include "gaussocc/synth.hpp"

namespace gaussocc {

enum class RefineMode { kOff, kZero, kOracleSnap };

RefineMode parse_refine_mode(const std::string& s);
std::string to_string(RefineMode m);

struct AttributeConfig {
  // "class": logits peaked on the ground-truth class seen by the pixel.
  // "constant": all-zero logits.
  std::string mode = "class";
  float scale = 0.25f;
  float opacity = 0.9f;
  float peak = 4.0f;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  SceneConfig scene;
  std::optional<std::filesystem::path> scene_file;
  std::string rig_preset = "surround6";
  RigConfig rig;
  std::uint32_t downsample = 2;
  double depth_noise = 0.0;
  AttributeConfig attributes;
  double voxel_size = 0.5;  // output occupancy grid
  double grid_size = 0.5;   // sampling grid s_g
  RefineMode refine = RefineMode::kZero;
  std::optional<std::filesystem::path> basis_file;
  // Mahalanobis cutoff of the renderer; only the built-in value is supported.
  double render_cutoff = kKernelCutoff;
  LossWeights losses;
  std::uint32_t ray_stride = 4;
  std::vector<double> ray_thresholds = kDefaultRayThresholds;
  bool dump_probs = false;
  int threads = 0;  // 0 keeps the OpenMP default
  std::filesystem::path out_dir = "out";

  void validate() const;
};

// Unknown keys are rejected. Fields absent from the document keep the values
// already in `base`.
PipelineConfig pipeline_config_from_json(const io::Json& j, PipelineConfig base = {});
io::Json to_json(const PipelineConfig& c);

// A stage threw. Carries the stage name and the original exception.
class StageError : public std::exception {
 public:
  StageError(std::string stage, std::exception_ptr cause, std::string message)
      : stage_(std::move(stage)), cause_(std::move(cause)), message_(std::move(message)) {}
  const char* what() const noexcept override { return message_.c_str(); }
  const std::string& stage() const { return stage_; }
  const std::exception_ptr& cause() const { return cause_; }

 private:
  std::string stage_;
  std::exception_ptr cause_;
  std::string message_;
};

SceneSpec pipeline_scene(const PipelineConfig& c);
// Full-resolution rig cameras.
std::vector<CameraModel> pipeline_cameras(const PipelineConfig& c);
AttributeProvider pipeline_attributes(const PipelineConfig& c, const SceneSpec& scene,
                                      std::span<const CameraModel> depth_cams);
OffsetBasis pipeline_basis(const PipelineConfig& c);
GaussianSet refine_stage(const GaussianSet& sampled, RefineMode mode, const OffsetBasis& basis,
                         const SceneSpec* scene);

// Cross-entropy and Lovasz terms against the ground-truth labels plus the
// depth loss of `pred_depths` against `gt_depths`.
LossReport evaluate_losses(const SemanticOccupancyField& field, const OccupancyGrid& gt,
                           std::span<const DepthMap> pred_depths, std::span<const DepthMap> gt_depths,
                           const LossWeights& weights);

struct PipelineSummary {
  std::size_t init_count = 0;
  std::size_t sampled_count = 0;
  std::size_t refined_count = 0;
  NearFarCounts init_near_far;
  NearFarCounts sampled_near_far;
  MetricReport metrics;
  LossReport losses;
};

io::Json to_json(const PipelineSummary& s);

// Stages in order: scene, depth, init, sample, refine, render, metrics,
// losses. Every artifact is written as <name>.partial and renamed once
// complete. Throws StageError naming the failing stage.
PipelineSummary run_pipeline(const PipelineConfig& config);

// Writes via <path>.partial and renames on success.
template <class Writer>
void write_atomically(const std::filesystem::path& path, Writer&& write) {
  std::filesystem::path partial = path;
  partial += ".partial";
  write(partial);
  std::filesystem::rename(partial, path);
}

// Radius separating "near" from "far" Gaussians around the rig.
inline constexpr double kNearRadius = 10.0;

}  // namespace gaussocc
