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

#include "gaussocc/reference/serial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gaussocc/errors.hpp"
#include "gaussocc/grid_sampler.hpp"

namespace gaussocc::reference {
namespace {

using Cell = std::array<std::int64_t, 3>;

bool cell_of(const Vec3& p, const VoxelGridSpec& spec, Cell& cell) {
  for (int k = 0; k < 3; ++k) {
    if (p[k] < spec.min()[k] || p[k] >= spec.max()[k]) return false;
    cell[k] = static_cast<std::int64_t>(std::floor(p[k] / spec.grid_size()));
    if (cell[k] < spec.cell_lo()[k] || cell[k] >= spec.cell_lo()[k] + spec.cell_dims()[k]) return false;
  }
  return true;
}

}  // namespace

SemanticOccupancyField render_grid(const GaussianSet& gs, const GridGeometry& target) {
  target.validate();
  const auto prepared = prepare_all(gs);
  SemanticOccupancyField f;
  f.geometry = target;
  f.num_classes = static_cast<std::uint32_t>(gs.num_classes);
  f.probs.assign(target.num_voxels() * f.channels(), 0.0f);
  f.labels = OccupancyGrid(target, f.num_classes);
  for (std::size_t v = 0; v < target.num_voxels(); ++v) {
    PointAccumulator acc(target.center(v), gs.num_classes);
    for (const auto& g : prepared) acc.add(g);
    std::span<float> o(f.probs.data() + v * f.channels(), f.channels());
    acc.write_occupancy(o);
    f.labels.labels[v] = label_from_occupancy(o, f.num_classes);
  }
  return f;
}

GaussianSet sample_representatives(const GaussianSet& gs, const VoxelGridSpec& spec, std::uint64_t seed) {
  std::map<std::uint64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    Cell c;
    if (!cell_of(gs.primitives[i].mean_d(), spec, c)) continue;
    std::uint64_t key = 0;
    for (int k = 0; k < 3; ++k) {
      key = key * static_cast<std::uint64_t>(spec.cell_dims()[k]) + static_cast<std::uint64_t>(c[k] - spec.cell_lo()[k]);
    }
    groups[key].push_back(i);
  }
  GaussianSet out;
  out.num_classes = gs.num_classes;
  for (const auto& [key, members] : groups) {
    const std::size_t pick = members[representative_offset(seed, key, members.size())];
    out.push_back(gs.primitives[pick], gs.provenance[pick]);
  }
  return out;
}

std::size_t count_occupied_voxels(const GaussianSet& gs, const VoxelGridSpec& spec) {
  std::set<Cell> cells;
  for (const auto& g : gs.primitives) {
    Cell c;
    if (cell_of(g.mean_d(), spec, c)) cells.insert(c);
  }
  return cells.size();
}

void sort_by_key(std::vector<KeyIndex>& items) {
  std::stable_sort(items.begin(), items.end(), [](const KeyIndex& a, const KeyIndex& b) { return a.key < b.key; });
}

double nearest_occupied_distance(const OccupancyGrid& grid, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.labels.size(); ++i) {
    if (grid.occupied(i)) best = std::min(best, (grid.geometry.center(i) - p).norm());
  }
  if (!std::isfinite(best)) throw UndefinedMetricError("grid has no occupied voxel");
  return best;
}

}  // namespace gaussocc::reference
