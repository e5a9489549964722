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

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

// Non-positional attributes assigned to a pixel-aligned Gaussian.
struct GaussianAttributes {
  Eigen::Vector3f scale = Eigen::Vector3f::Constant(0.25f);
  std::array<float, 4> rotation{1.0f, 0.0f, 0.0f, 0.0f};
  float opacity = 0.5f;
  std::vector<float> semantics;
};

// Maps (view, row, col) to attributes. Called concurrently from worker
// threads, so implementations must be pure.
using AttributeProvider =
    std::function<GaussianAttributes(std::uint32_t view, std::uint32_t row, std::uint32_t col)>;

// Same attributes for every pixel: isotropic scale, identity rotation and
// all-zero logits.
AttributeProvider constant_attributes(std::size_t num_classes, float scale, float opacity);

// Attributes from per-view class maps (one class id per depth pixel, -1 for
// none): logit `peak` on the mapped class, 0 elsewhere.
AttributeProvider class_map_attributes(std::vector<std::vector<int>> class_maps,
                                       std::uint32_t width, std::size_t num_classes,
                                       float scale, float opacity, float peak);

// mu = o + d v, v the unit ray through the center of pixel (row, col).
// Throws IndexError for pixels outside the image and DomainError for d < 0.
Vec3 unproject_pixel(const CameraModel& cam, std::uint32_t row, std::uint32_t col, double depth);

// One Gaussian per valid depth pixel across all views, in (view, row, col)
// raster order. Each depth map must match its camera's image size.
GaussianSet init_gaussians(std::span<const CameraModel> cams, std::span<const DepthMap> depths,
                           const AttributeProvider& attrs, std::size_t num_classes);

}  // namespace gaussocc
