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
#include <optional>
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

// Oriented box resting anywhere in the scene; yaw rotates about +z.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;
  std::uint32_t class_id = 0;

  bool contains(const Vec3& p) const;
  bool operator==(const Box&) const = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::uint32_t num_classes = 5;
  Vec3 extent_min{-16.0, -16.0, -4.5};
  Vec3 extent_max{16.0, 16.0, 3.5};
  // Solid ground fills z < ground_z inside the xy extents.
  bool has_ground = true;
  double ground_z = -4.2;
  std::uint32_t ground_class = 0;
  std::vector<Box> boxes;

  void validate() const;
  bool operator==(const SceneSpec&) const = default;
};

struct SceneConfig {
  std::uint32_t num_boxes = 12;
  std::uint32_t num_classes = 5;
  Vec3 extent_min{-16.0, -16.0, -4.5};
  Vec3 extent_max{16.0, 16.0, 3.5};
  bool has_ground = true;
  double ground_z = -4.2;
  std::uint32_t ground_class = 0;
  double min_half_extent = 0.5;
  double max_half_extent = 2.0;
  double max_half_height = 1.5;
  // Box centers keep this xy distance from the origin, where the rig sits.
  double clear_radius = 3.0;
  // Lattice pitch, anchored at extent_min, that box faces snap to. Snapped
  // boxes are axis-aligned (yaw rounded to a quarter turn). 0 disables.
  double snap = 0.5;
};

// Boxes stand on the ground and stay inside the xy extents; box classes are
// drawn from the classes other than ground_class.
SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& config);

// Label of the solid containing each voxel center: ground first, then boxes
// in list order, later entries overriding earlier ones.
OccupancyGrid rasterize_gt_grid(const SceneSpec& scene, const GridGeometry& geometry);

struct SurfaceHit {
  double distance = 0.0;
  std::uint32_t class_id = 0;
};

// Nearest intersection of the ray o + t v (t >= 0, v unit) with the scene.
std::optional<SurfaceHit> intersect_scene(const SceneSpec& scene, const Vec3& origin, const Vec3& dir);

struct DepthRenderOptions {
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
};

// One depth map per camera at the camera's own resolution. Noise is drawn per
// pixel from a counter-based generator; uncertainty is max(noise_std, 1e-3).
std::vector<DepthMap> render_depth_maps(const SceneSpec& scene, std::span<const CameraModel> cams,
                                        const DepthRenderOptions& options = {});

// Class id of the first surface hit per pixel, -1 for no hit; row-major.
std::vector<std::vector<int>> render_class_maps(const SceneSpec& scene, std::span<const CameraModel> cams);

// Closest point on any solid's surface; p itself when the scene is empty.
Vec3 nearest_surface_point(const SceneSpec& scene, const Vec3& p);

struct RigConfig {
  std::uint32_t width = 160;
  std::uint32_t height = 96;
  double hfov_deg = 70.0;
  double pitch_deg = 10.0;  // downward tilt
  Vec3 position{0.0, 0.0, -2.5};
};

// Six cameras at one position, yaw spaced 60 degrees starting along +x.
std::vector<CameraModel> surround6(const RigConfig& rig = {});

struct RandomGaussianOptions {
  double min_scale = 0.1;
  double max_scale = 0.5;
  std::size_t num_classes = 4;
};

// Uniform means in [lo, hi), uniform per-axis scales, uniform random
// rotations, uniform opacity and standard-normal logits. Provenance is
// (0, 0, index).
GaussianSet random_gaussians(std::size_t count, const Vec3& lo, const Vec3& hi, std::uint64_t seed,
                             const RandomGaussianOptions& options = {});

// Grid covering the scene extents at the given voxel size.
GridGeometry scene_grid(const SceneSpec& scene, double voxel_size);

}  // namespace gaussocc
