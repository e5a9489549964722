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

// Mahalanobis radius beyond which a Gaussian contributes nothing.
inline constexpr double kKernelCutoff = 3.0;

// A primitive with everything the renderer needs per evaluation precomputed.
struct PreparedGaussian {
  Vec3 mean;
  Mat3 rotation_t;       // R^T
  Vec3 inv_scale;        // 1 / s per axis, after the scale floor
  Vec3 half_extent;      // axis-aligned bound of the cutoff ellipsoid
  double opacity = 0.0;
  double density_norm = 0.0;  // 1 / ((2 pi)^{3/2} |Sigma|^{1/2})
  std::vector<double> class_probs;  // softmax of the logits

  double mahalanobis_sq(const Vec3& x) const {
    const Vec3 local = rotation_t * (x - mean);
    return local.cwiseProduct(inv_scale).squaredNorm();
  }
};

PreparedGaussian prepare(const GaussianPrimitive& g);
std::vector<PreparedGaussian> prepare_all(const GaussianSet& gs);

std::vector<double> softmax(std::span<const float> logits);

// exp(-d^T Sigma^-1 d / 2), zero beyond the cutoff.
double kernel_phi(const Vec3& x, const GaussianPrimitive& g);
double kernel_phi(const Vec3& x, const PreparedGaussian& g);

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Accumulates the contributions of Gaussians at one query point. Both the
// culled and the all-pairs renderers feed Gaussians through this in
// ascending index order, so they agree whenever the cull is conservative.
class PointAccumulator {
 public:
  PointAccumulator(const Vec3& x, std::size_t num_classes) : x_(x), numer_(num_classes) {}

  void add(const PreparedGaussian& g);

  // 1 - prod(1 - a_i phi_i), from the compensated log-sum.
  double alpha() const;
  // False when no Gaussian carried posterior weight.
  bool has_semantics() const { return denom_.value() > 0.0; }
  // Posterior-weighted class distribution; uniform without support.
  std::vector<double> semantics() const;
  // [1 - alpha; alpha * e] written to out (num_classes + 1 entries).
  void write_occupancy(std::span<float> out) const;

 private:
  Vec3 x_;
  CompensatedSum log_keep_;
  CompensatedSum denom_;
  std::vector<CompensatedSum> numer_;
};

double occupancy_alpha(const Vec3& x, const GaussianSet& gs);

struct SemanticEstimate {
  std::vector<double> probs;
  // Set when no Gaussian had posterior weight at x and probs is uniform.
  bool uniform_fallback = false;
};

SemanticEstimate expected_semantics(const Vec3& x, const GaussianSet& gs);

// Per-voxel (C+1)-vectors [empty; classes] plus the argmax label grid.
struct SemanticOccupancyField {
  GridGeometry geometry;
  std::uint32_t num_classes = 0;
  std::vector<float> probs;  // num_voxels x (num_classes + 1), row-major
  OccupancyGrid labels;

  std::size_t channels() const { return std::size_t{num_classes} + 1; }
  std::span<const float> at(std::size_t voxel) const {
    return std::span<const float>(probs).subspan(voxel * channels(), channels());
  }
};

// Argmax over [empty; classes]; ties resolve to the lower channel.
std::uint8_t label_from_occupancy(std::span<const float> o, std::uint32_t num_classes);

// Channel of label l in the [empty; classes] layout.
inline std::size_t channel_of_label(std::uint8_t label, std::uint32_t num_classes) {
  return label >= num_classes ? 0 : std::size_t{label} + 1;
}

// Evaluates every voxel center. Gaussians are binned into voxel tiles by the
// axis-aligned bound of their cutoff ellipsoid; each voxel only visits the
// Gaussians listed in its tile. Parallel over tiles.
SemanticOccupancyField render_grid(const GaussianSet& gs, const GridGeometry& target);

// Inclusive voxel index range whose centers fall inside the Gaussian's
// padded bound; empty when lo > hi on any axis.
struct VoxelRange {
  std::array<std::int64_t, 3> lo;
  std::array<std::int64_t, 3> hi;
  bool empty() const { return lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2]; }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1] && z >= lo[2] && z <= hi[2];
  }
};

VoxelRange voxel_range(const PreparedGaussian& g, const GridGeometry& target);

}  // namespace gaussocc
