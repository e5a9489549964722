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

#include "gaussocc/initialization.hpp"

#include <string>

#include "gaussocc/errors.hpp"
#include "gaussocc/parallel.hpp"

namespace gaussocc {

AttributeProvider constant_attributes(std::size_t num_classes, float scale, float opacity) {
  GaussianAttributes a;
  a.scale = Eigen::Vector3f::Constant(scale);
  a.opacity = opacity;
  a.semantics.assign(num_classes, 0.0f);
  return [a](std::uint32_t, std::uint32_t, std::uint32_t) { return a; };
}

AttributeProvider class_map_attributes(std::vector<std::vector<int>> class_maps, std::uint32_t width,
                                       std::size_t num_classes, float scale, float opacity,
                                       float peak) {
  return [maps = std::move(class_maps), width, num_classes, scale, opacity, peak](
             std::uint32_t view, std::uint32_t row, std::uint32_t col) {
    GaussianAttributes a;
    a.scale = Eigen::Vector3f::Constant(scale);
    a.opacity = opacity;
    a.semantics.assign(num_classes, 0.0f);
    const int cls = maps.at(view).at(std::size_t{row} * width + col);
    if (cls >= 0 && static_cast<std::size_t>(cls) < num_classes) a.semantics[static_cast<std::size_t>(cls)] = peak;
    return a;
  };
}

Vec3 unproject_pixel(const CameraModel& cam, std::uint32_t row, std::uint32_t col, double depth) {
  if (!(depth >= 0.0)) throw DomainError("unprojection depth must be nonnegative");
  return cam.origin() + depth * cam.pixel_ray(row, col);
}

GaussianSet init_gaussians(std::span<const CameraModel> cams, std::span<const DepthMap> depths,
                           const AttributeProvider& attrs, std::size_t num_classes) {
  if (cams.size() != depths.size()) {
    throw ShapeError(std::to_string(cams.size()) + " cameras but " + std::to_string(depths.size()) +
                     " depth maps");
  }
  for (std::size_t v = 0; v < cams.size(); ++v) {
    if (cams[v].height != depths[v].height || cams[v].width != depths[v].width) {
      throw ShapeError("depth map " + std::to_string(v) + " is " + std::to_string(depths[v].height) +
                       "x" + std::to_string(depths[v].width) + " but its camera is " +
                       std::to_string(cams[v].height) + "x" + std::to_string(cams[v].width));
    }
    depths[v].validate();
  }

  // Output slot of each (view, row) is the prefix sum of valid pixels before
  // it, so the parallel fill below writes every Gaussian by index.
  std::vector<std::size_t> row_start;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> rows;
  for (std::size_t v = 0; v < cams.size(); ++v) {
    for (std::uint32_t r = 0; r < depths[v].height; ++r) rows.emplace_back(static_cast<std::uint32_t>(v), r);
  }
  row_start.assign(rows.size() + 1, 0);
  const auto n_rows = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
    const auto [v, r] = rows[static_cast<std::size_t>(i)];
    const DepthMap& d = depths[v];
    std::size_t count = 0;
    for (std::uint32_t c = 0; c < d.width; ++c) count += d.valid(d.index(r, c)) ? 1 : 0;
    row_start[static_cast<std::size_t>(i) + 1] = count;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) row_start[i + 1] += row_start[i];

  GaussianSet out;
  out.num_classes = num_classes;
  out.primitives.resize(row_start.back());
  out.provenance.resize(row_start.back());

  parallel::ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) trap.guard([&] {
    const auto [v, r] = rows[static_cast<std::size_t>(i)];
    const DepthMap& d = depths[v];
    const CameraModel& cam = cams[v];
    std::size_t slot = row_start[static_cast<std::size_t>(i)];
    for (std::uint32_t c = 0; c < d.width; ++c) {
      const float depth = d.depth[d.index(r, c)];
      if (!std::isfinite(depth)) continue;
      GaussianAttributes a = attrs(v, r, c);
      GaussianPrimitive& g = out.primitives[slot];
      g.mean = unproject_pixel(cam, r, c, depth).cast<float>();
      g.scale = a.scale.cwiseMax(static_cast<float>(kScaleFloor));
      g.rotation = a.rotation;
      g.opacity = a.opacity;
      g.semantics = std::move(a.semantics);
      out.provenance[slot] = {v, r, c};
      ++slot;
    }
  });
  trap.rethrow();
  return out;
}

}  // namespace gaussocc
