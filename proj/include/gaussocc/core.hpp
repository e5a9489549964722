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

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace gaussocc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Lower bound on every per-axis standard deviation, in meters. Keeps the
// covariance invertible for the renderer's Mahalanobis evaluation.
inline constexpr double kScaleFloor = 1e-3;
// Maximum tolerated |‖q‖ − 1| for a rotation quaternion.
inline constexpr double kRotationTolerance = 1e-6;
// Label reserved for voxels excluded from evaluation.
inline constexpr std::uint8_t kUnknownLabel = 255;

// Rotation quaternion, (w, x, y, z) order everywhere in this library.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quaternion normalized() const;
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  Mat3 to_matrix() const;
};

struct GaussianPrimitive {
  Eigen::Vector3f mean = Eigen::Vector3f::Zero();
  // Per-axis standard deviation, meters.
  Eigen::Vector3f scale = Eigen::Vector3f::Constant(static_cast<float>(kScaleFloor));
  std::array<float, 4> rotation{1.0f, 0.0f, 0.0f, 0.0f};  // (w, x, y, z)
  float opacity = 0.0f;
  // Raw logits; softmax is applied only at render time.
  std::vector<float> semantics;

  Quaternion quaternion() const { return {rotation[0], rotation[1], rotation[2], rotation[3]}; }
  Vec3 mean_d() const { return mean.cast<double>(); }
  Vec3 scale_d() const { return scale.cast<double>(); }

  bool operator==(const GaussianPrimitive&) const = default;
};

// Checks the primitive invariants (unit rotation, scale floor, opacity range,
// logit count). Throws InvalidRotationError / DomainError / ShapeError.
void validate(const GaussianPrimitive& g, std::size_t num_classes);

struct Provenance {
  std::uint32_t view = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  bool operator==(const Provenance&) const = default;
};

struct GaussianSet {
  std::size_t num_classes = 0;
  std::vector<GaussianPrimitive> primitives;
  std::vector<Provenance> provenance;

  std::size_t size() const { return primitives.size(); }
  bool empty() const { return primitives.empty(); }
  void push_back(GaussianPrimitive g, Provenance p) {
    primitives.push_back(std::move(g));
    provenance.push_back(p);
  }
  // Provenance/primitive length agreement plus per-primitive invariants.
  void validate() const;

  bool operator==(const GaussianSet&) const = default;
};

// Pinhole camera. Camera frame is x right, y down, z forward; the pose maps
// camera coordinates to world coordinates. Pixel (row, col) covers
// [col, col+1) x [row, row+1) in continuous image coordinates, so its center
// sits at (row + 0.5, col + 0.5).
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  const Vec3& origin() const { return translation; }
  // Unit world-space direction through continuous image point (v, u), where v
  // runs along rows and u along columns.
  Vec3 direction_at(double v, double u) const;
  // Unit world-space direction through the center of pixel (row, col).
  Vec3 pixel_ray(std::uint32_t row, std::uint32_t col) const;
  // Continuous (v, u) image coordinates of a world point; nullopt when the
  // point is not in front of the camera.
  std::optional<Eigen::Vector2d> project(const Vec3& world) const;
  // Camera for an image downsampled by integer ratio r.
  CameraModel downsampled(std::uint32_t r) const;
  void validate() const;
};

// Geometry of a dense voxel volume. Voxel (x, y, z) covers
// origin + [x, x+1) * voxel_size on each axis; the linear index runs with z
// fastest: (x * Y + y) * Z + z.
struct GridGeometry {
  std::array<std::uint32_t, 3> dims{0, 0, 0};
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.5;

  std::size_t num_voxels() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return (static_cast<std::size_t>(x) * dims[1] + y) * dims[2] + z;
  }
  std::array<std::uint32_t, 3> coord(std::size_t index) const {
    const auto z = static_cast<std::uint32_t>(index % dims[2]);
    const std::size_t xy = index / dims[2];
    return {static_cast<std::uint32_t>(xy / dims[1]), static_cast<std::uint32_t>(xy % dims[1]), z};
  }
  Vec3 center(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return origin + voxel_size * Vec3(x + 0.5, y + 0.5, z + 0.5);
  }
  Vec3 center(std::size_t index) const {
    const auto c = coord(index);
    return center(c[0], c[1], c[2]);
  }
  Vec3 max_corner() const {
    return origin + voxel_size * Vec3(dims[0], dims[1], dims[2]);
  }
  // Voxel containing p (half-open cells), or nullopt outside the volume.
  std::optional<std::array<std::uint32_t, 3>> locate(const Vec3& p) const;
  void validate() const;

  bool operator==(const GridGeometry&) const = default;
};

// Dense semantic label volume. Class ids are 0..num_classes-1; the empty
// label equals num_classes.
struct OccupancyGrid {
  GridGeometry geometry;
  std::uint32_t num_classes = 0;
  std::vector<std::uint8_t> labels;

  OccupancyGrid() = default;
  OccupancyGrid(GridGeometry geom, std::uint32_t classes)
      : geometry(geom), num_classes(classes), labels(geom.num_voxels(), static_cast<std::uint8_t>(classes)) {}

  std::uint8_t empty_id() const { return static_cast<std::uint8_t>(num_classes); }
  bool occupied(std::size_t i) const { return labels[i] < num_classes; }
  void validate() const;

  bool operator==(const OccupancyGrid&) const = default;
};

// Geometry of the auxiliary sampling grid. Integer cell coordinates are
// floor(p / grid_size); the cells covering [min, max) span
// [cell_lo, cell_lo + cell_dims).
class VoxelGridSpec {
 public:
  VoxelGridSpec(const Vec3& min, const Vec3& max, double grid_size);

  const Vec3& min() const { return min_; }
  const Vec3& max() const { return max_; }
  double grid_size() const { return grid_size_; }
  const std::array<std::int64_t, 3>& cell_lo() const { return lo_; }
  const std::array<std::int64_t, 3>& cell_dims() const { return dims_; }
  std::uint64_t num_cells() const {
    return static_cast<std::uint64_t>(dims_[0]) * dims_[1] * dims_[2];
  }

 private:
  Vec3 min_;
  Vec3 max_;
  double grid_size_;
  std::array<std::int64_t, 3> lo_{};
  std::array<std::int64_t, 3> dims_{};
};

// Per-pixel along-ray depth with aleatoric uncertainty. Depth +inf marks a
// pixel with no return.
struct DepthMap {
  static constexpr float kNoReturn = std::numeric_limits<float>::infinity();

  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> depth;
  std::vector<float> uncertainty;

  DepthMap() = default;
  DepthMap(std::uint32_t h, std::uint32_t w)
      : height(h), width(w), depth(std::size_t{h} * w, kNoReturn), uncertainty(std::size_t{h} * w, 1.0f) {}

  std::size_t size() const { return std::size_t{height} * width; }
  std::size_t index(std::uint32_t row, std::uint32_t col) const { return std::size_t{row} * width + col; }
  bool valid(std::size_t i) const { return std::isfinite(depth[i]); }
  void validate() const;

  bool operator==(const DepthMap&) const = default;
};

struct CovarianceDiagnostics {
  bool scale_clamped = false;
};

// Sigma = R S S^T R^T with S = diag(scale). Scales below kScaleFloor are
// clamped (reported through diag); a quaternion off the unit sphere by more
// than kRotationTolerance throws InvalidRotationError.
Mat3 covariance_of(const Vec3& scale, const Quaternion& rotation,
                   CovarianceDiagnostics* diag = nullptr);

}  // namespace gaussocc
