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
#include <optional>
#include <vector>

#include "gaussocc/core.hpp"
#include "gaussocc/random.hpp"

namespace gaussocc {

inline constexpr std::uint64_t kOutOfBoundsKey = ~std::uint64_t{0};

struct VoxelKey {
  std::array<std::int64_t, 3> coord;
  std::uint64_t key;

  bool operator==(const VoxelKey&) const = default;
};

// coord = floor(mean / grid_size); key = linear index of coord - cell_lo
// over the grid's cell dims (z fastest). Means outside [min, max) give
// nullopt.
std::optional<VoxelKey> voxelize_key(const Vec3& mean, const VoxelGridSpec& spec);

// Inverse of the key linearization.
std::array<std::int64_t, 3> key_to_coord(std::uint64_t key, const VoxelGridSpec& spec);

// Key per Gaussian, kOutOfBoundsKey for out-of-extent means.
std::vector<std::uint64_t> voxel_keys(const GaussianSet& gs, const VoxelGridSpec& spec);

// Position of the representative inside a voxel group of `group_size`
// members ordered by input index.
inline std::size_t representative_offset(std::uint64_t seed, std::uint64_t key, std::size_t group_size) {
  return static_cast<std::size_t>(splitmix64(seed ^ key) % group_size);
}

// Keeps one Gaussian per occupied in-bounds voxel, drawn by
// representative_offset, and returns them in key order. Out-of-extent
// Gaussians are dropped. Pure function of (gs, spec, seed).
GaussianSet sample_representatives(const GaussianSet& gs, const VoxelGridSpec& spec, std::uint64_t seed);

// Input indices of the representatives, in key order.
std::vector<std::size_t> representative_indices(const GaussianSet& gs, const VoxelGridSpec& spec,
                                                std::uint64_t seed);

}  // namespace gaussocc

