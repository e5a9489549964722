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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

struct IouResult {
  double iou = 0.0;   // binary occupied vs empty
  double miou = 0.0;  // mean over classes present in ground truth
  // Per semantic class; nullopt when the class appears in neither grid.
  std::vector<std::optional<double>> per_class;
};

// Voxels whose ground truth is `unknown_id` are excluded. Labels below
// num_classes are occupied; anything else counts as empty.
IouResult iou_miou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint32_t num_classes,
                   std::uint8_t empty_id, std::uint8_t unknown_id);
IouResult iou_miou(const OccupancyGrid& pred, const OccupancyGrid& gt, std::uint8_t unknown_id = kUnknownLabel);

inline const std::vector<double> kDefaultRayThresholds{1.0, 2.0, 4.0};

struct RayIouResult {
  std::vector<double> thresholds;
  std::vector<double> per_threshold;
  double mean = 0.0;
  std::size_t rays = 0;  // rays that intersect the grid volume
};

// Rays from each camera center through the center of every stride-th pixel
// (rows and columns), marched through both grids. A ray is a true positive
// for class c at threshold tau when both first hits have class c and their
// distances differ by at most tau; otherwise it counts as a false positive for
// the predicted hit class and a false negative for the ground-truth hit
// class. Per-class IoU is averaged over classes hit in either grid, then over
// thresholds.
RayIouResult ray_iou(const OccupancyGrid& pred, const OccupancyGrid& gt, std::span<const CameraModel> cams,
                     std::span<const double> thresholds, std::uint32_t stride = 4);

struct InitQuality {
  double perc = 0.0;  // percent of Gaussians inside occupied ground-truth voxels
  double dist = 0.0;  // mean distance to the nearest occupied voxel center, m
};

InitQuality init_quality(const GaussianSet& gs, const OccupancyGrid& gt);

struct NearFarCounts {
  std::size_t near = 0;
  std::size_t far = 0;
  double ratio() const { return far == 0 ? std::numeric_limits<double>::infinity() : double(near) / double(far); }
};

// Splits Gaussians by distance from `center` at `radius`.
NearFarCounts near_far_counts(const GaussianSet& gs, const Vec3& center, double radius);

struct MetricReport {
  IouResult occupancy;
  std::optional<RayIouResult> rays;
  std::optional<InitQuality> init;
};

}  // namespace gaussocc
