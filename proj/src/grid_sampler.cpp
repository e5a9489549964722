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

#include "gaussocc/grid_sampler.hpp"

#include <cmath>

#include "gaussocc/radix_sort.hpp"

namespace gaussocc {

std::optional<VoxelKey> voxelize_key(const Vec3& mean, const VoxelGridSpec& spec) {
  VoxelKey out{};
  std::uint64_t key = 0;
  for (int k = 0; k < 3; ++k) {
    if (!(mean[k] >= spec.min()[k] && mean[k] < spec.max()[k])) return std::nullopt;
    out.coord[k] = static_cast<std::int64_t>(std::floor(mean[k] / spec.grid_size()));
    const std::int64_t rel = out.coord[k] - spec.cell_lo()[k];
    // Rounding in mean / grid_size can push a point just inside max onto the
    // next cell; such cells fall outside the keyed range.
    if (rel < 0 || rel >= spec.cell_dims()[k]) return std::nullopt;
    key = key * static_cast<std::uint64_t>(spec.cell_dims()[k]) + static_cast<std::uint64_t>(rel);
  }
  out.key = key;
  return out;
}

std::array<std::int64_t, 3> key_to_coord(std::uint64_t key, const VoxelGridSpec& spec) {
  std::array<std::int64_t, 3> c{};
  for (int k = 2; k >= 0; --k) {
    const auto d = static_cast<std::uint64_t>(spec.cell_dims()[k]);
    c[k] = static_cast<std::int64_t>(key % d) + spec.cell_lo()[k];
    key /= d;
  }
  return c;
}

std::vector<std::uint64_t> voxel_keys(const GaussianSet& gs, const VoxelGridSpec& spec) {
  std::vector<std::uint64_t> keys(gs.size());
  const auto n = static_cast<std::ptrdiff_t>(gs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto vk = voxelize_key(gs.primitives[static_cast<std::size_t>(i)].mean_d(), spec);
    keys[static_cast<std::size_t>(i)] = vk ? vk->key : kOutOfBoundsKey;
  }
  return keys;
}

std::vector<std::size_t> representative_indices(const GaussianSet& gs, const VoxelGridSpec& spec,
                                                std::uint64_t seed) {
  const auto keys = voxel_keys(gs, spec);

  std::vector<KeyIndex> items;
  items.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] != kOutOfBoundsKey) items.push_back({keys[i], i});
  }
  // Stable sort: members of a group stay in ascending input-index order.
  radix_sort_by_key(items, bit_width_of(spec.num_cells() - 1));

  std::vector<std::size_t> group_begin;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i == 0 || items[i].key != items[i - 1].key) group_begin.push_back(i);
  }
  group_begin.push_back(items.size());

  const std::size_t n_groups = group_begin.size() - 1;
  std::vector<std::size_t> chosen(n_groups);
  const auto ng = static_cast<std::ptrdiff_t>(n_groups);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < ng; ++g) {
    const std::size_t b = group_begin[static_cast<std::size_t>(g)];
    const std::size_t size = group_begin[static_cast<std::size_t>(g) + 1] - b;
    chosen[static_cast<std::size_t>(g)] = items[b + representative_offset(seed, items[b].key, size)].index;
  }
  return chosen;
}

GaussianSet sample_representatives(const GaussianSet& gs, const VoxelGridSpec& spec, std::uint64_t seed) {
  const auto chosen = representative_indices(gs, spec, seed);
  GaussianSet out;
  out.num_classes = gs.num_classes;
  out.primitives.resize(chosen.size());
  out.provenance.resize(chosen.size());
  const bool has_provenance = gs.provenance.size() == gs.primitives.size();
  const auto n = static_cast<std::ptrdiff_t>(chosen.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t src = chosen[static_cast<std::size_t>(i)];
    out.primitives[static_cast<std::size_t>(i)] = gs.primitives[src];
    if (has_provenance) out.provenance[static_cast<std::size_t>(i)] = gs.provenance[src];
  }
  return out;
}

}  // namespace gaussocc
