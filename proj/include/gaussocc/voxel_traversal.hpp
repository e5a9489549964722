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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "gaussocc/core.hpp"

namespace gaussocc {

// Parametric interval [t_enter, t_exit] of the ray inside the grid volume,
// clipped to t >= 0.
inline std::optional<std::array<double, 2>> clip_ray_to_grid(const GridGeometry& g, const Vec3& origin,
                                                             const Vec3& dir) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Vec3 lo = g.origin;
  const Vec3 hi = g.max_corner();
  double t0 = 0.0, t1 = kInf;
  for (int k = 0; k < 3; ++k) {
    if (dir[k] == 0.0) {
      if (origin[k] < lo[k] || origin[k] >= hi[k]) return std::nullopt;
      continue;
    }
    double a = (lo[k] - origin[k]) / dir[k];
    double b = (hi[k] - origin[k]) / dir[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (!(t0 < t1)) return std::nullopt;
  return std::array<double, 2>{t0, t1};
}

// Amanatides-Woo traversal: visits every voxel the ray passes through, in
// order, as visit(x, y, z, t_enter). Stops early when visit returns true;
// returns whether it did.
template <class Visitor>
bool traverse_voxels(const GridGeometry& g, const Vec3& origin, const Vec3& dir, Visitor&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto span = clip_ray_to_grid(g, origin, dir);
  if (!span) return false;
  const auto [t_start, t_end] = *span;

  std::array<std::int64_t, 3> idx{}, step{};
  std::array<double, 3> t_next{};
  const Vec3 entry = origin + t_start * dir;
  for (int k = 0; k < 3; ++k) {
    const double f = std::floor((entry[k] - g.origin[k]) / g.voxel_size);
    idx[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(f), 0, static_cast<std::int64_t>(g.dims[k]) - 1);
    step[k] = dir[k] > 0.0 ? 1 : (dir[k] < 0.0 ? -1 : 0);
  }
  // Boundary crossings are recomputed from the voxel index each step rather
  // than accumulated, so t values carry no drift.
  auto crossing = [&](int k) {
    if (step[k] == 0) return kInf;
    const double plane = g.origin[k] + static_cast<double>(idx[k] + (step[k] > 0 ? 1 : 0)) * g.voxel_size;
    return (plane - origin[k]) / dir[k];
  };
  for (int k = 0; k < 3; ++k) t_next[k] = crossing(k);

  double t_enter = t_start;
  while (t_enter < t_end) {
    if (visit(static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[1]),
              static_cast<std::uint32_t>(idx[2]), t_enter)) {
      return true;
    }
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    t_enter = std::max(t_enter, t_next[axis]);
    idx[axis] += step[axis];
    if (idx[axis] < 0 || idx[axis] >= static_cast<std::int64_t>(g.dims[axis])) break;
    t_next[axis] = crossing(axis);
  }
  return false;
}

struct RayHit {
  double distance;
  std::uint8_t label;
  std::array<std::uint32_t, 3> voxel;
};

// First voxel along the ray holding a class label (neither empty nor
// unknown); distance is the ray parameter where the ray enters it.
inline std::optional<RayHit> first_hit(const OccupancyGrid& grid, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> hit;
  traverse_voxels(grid.geometry, origin, dir, [&](std::uint32_t x, std::uint32_t y, std::uint32_t z, double t) {
    const std::uint8_t l = grid.labels[grid.geometry.index(x, y, z)];
    if (l < grid.num_classes) {
      hit = RayHit{t, l, {x, y, z}};
      return true;
    }
    return false;
  });
  return hit;
}

}  // namespace gaussocc
