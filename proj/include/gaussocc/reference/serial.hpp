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
#include <vector>

#include "gaussocc/core.hpp"
#include "gaussocc/radix_sort.hpp"
#include "gaussocc/renderer.hpp"

// Single-threaded, unculled counterparts of the parallel kernels. Used as
// oracles in tests and as the baseline in benchmarks.
namespace gaussocc::reference {

// Every voxel visits every Gaussian in index order.
SemanticOccupancyField render_grid(const GaussianSet& gs, const GridGeometry& target);

// Groups by std::map over integer cells; same representative rule as the
// parallel sampler.
GaussianSet sample_representatives(const GaussianSet& gs, const VoxelGridSpec& spec, std::uint64_t seed);

// Distinct in-bounds cells, counted through a std::set of coordinates.
std::size_t count_occupied_voxels(const GaussianSet& gs, const VoxelGridSpec& spec);

// std::stable_sort by key.
void sort_by_key(std::vector<KeyIndex>& items);

// Linear scan over all occupied voxel centers.
double nearest_occupied_distance(const OccupancyGrid& grid, const Vec3& p);

}  // namespace gaussocc::reference
