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

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

// K_b x 3 matrix of offset directions, stored row by row (meters).
struct OffsetBasis {
  std::vector<Vec3> rows;

  // {+d e_x, -d e_x, +d e_y, -d e_y, +d e_z, -d e_z}.
  static OffsetBasis axis_aligned(double delta_max);

  std::size_t size() const { return rows.size(); }
  // Every row has a negated partner and lies along a coordinate axis.
  bool is_axis_paired() const;
};

using WeightVectors = std::vector<std::vector<double>>;

// Produces one K_b-vector of raw weights per Gaussian.
using WeightProvider = std::function<WeightVectors(const GaussianSet&)>;

// All-zero weights; with a paired basis this is the identity refinement.
WeightProvider zero_weights(std::size_t basis_size);

// Weights that move each mean toward `nearest_surface(mean)`, saturating at
// the basis reach. Requires an axis-paired basis.
WeightProvider snap_weights(std::function<Vec3(const Vec3&)> nearest_surface, const OffsetBasis& basis);

double sigmoid(double w);

// B^T sigmoid(w), accumulated row by row in basis order.
Vec3 basis_offset(std::span<const double> weights, const OffsetBasis& basis);

// mu' = mu + B^T sigmoid(w_i) for every Gaussian; other attributes are copied
// untouched.
GaussianSet refine_positions(const GaussianSet& gs, const OffsetBasis& basis, const WeightVectors& weights);

// {"rows": [[x, y, z], ...]}
OffsetBasis load_basis(const std::filesystem::path& path);
void save_basis(const OffsetBasis& basis, const std::filesystem::path& path);

}  // namespace gaussocc
