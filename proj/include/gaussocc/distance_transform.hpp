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
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

// Exact squared Euclidean distance transform on a voxel lattice, in voxel
// units: for every voxel, the squared distance from its center to the nearest
// site center (+inf when there are no sites). Three sequential 1-D
// lower-envelope passes (z, then y, then x), each parallel over lines.
// Linear index layout matches GridGeometry (z fastest).
std::vector<double> squared_edt(std::span<const std::uint8_t> is_site, const std::array<std::uint32_t, 3>& dims);

// 1-D lower envelope of parabolas (q - i)^2 + f(i), evaluated at integers.
// f may contain +inf.
void lower_envelope_1d(std::span<const double> f, std::span<double> out, std::span<int> v_scratch,
                       std::span<double> z_scratch);

// Exact distance from arbitrary points to the nearest occupied voxel center
// of a grid. The lattice transform bounds the search radius around the query;
// per-line nearest-site tables along x finish the search exactly.
class NearestOccupiedCenter {
 public:
  // Throws UndefinedMetricError when the grid has no occupied voxel.
  explicit NearestOccupiedCenter(const OccupancyGrid& grid);

  // Distance in meters from p to the nearest occupied voxel center.
  double distance(const Vec3& p) const;
  // Squared lattice distance (voxel units) at voxel center `index`.
  double lattice_sq(std::size_t index) const { return edt_sq_[index]; }

 private:
  GridGeometry geom_;
  std::vector<double> edt_sq_;
  // Per (y, z) line along x: largest site index <= i and smallest >= i
  // (-1 when absent), stored at ((y * Z) + z) * X + i.
  std::vector<std::int32_t> left_;
  std::vector<std::int32_t> right_;
};

}  // namespace gaussocc
