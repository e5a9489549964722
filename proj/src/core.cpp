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

#include "gaussocc/core.hpp"

#include <string>

#include "gaussocc/errors.hpp"

namespace gaussocc {

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw InvalidRotationError("cannot normalize a zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Mat3 Quaternion::to_matrix() const {
  const double xx = x * x, yy = y * y, zz = z * z;
  const double xy = x * y, xz = x * z, yz = y * z;
  const double wx = w * x, wy = w * y, wz = w * z;
  Mat3 r;
  r << 1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy),
       2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx),
       2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy);
  return r;
}

Mat3 covariance_of(const Vec3& scale, const Quaternion& rotation, CovarianceDiagnostics* diag) {
  if (std::abs(rotation.norm() - 1.0) > kRotationTolerance) {
    throw InvalidRotationError("rotation quaternion norm " + std::to_string(rotation.norm()) +
                               " is not 1");
  }
  Vec3 s = scale;
  bool clamped = false;
  for (int k = 0; k < 3; ++k) {
    if (!(s[k] >= kScaleFloor)) {
      s[k] = kScaleFloor;
      clamped = true;
    }
  }
  if (diag != nullptr) diag->scale_clamped = clamped;

  // M = R S, Sigma = M M^T; symmetrize to kill rounding asymmetry.
  const Mat3 m = rotation.normalized().to_matrix() * s.asDiagonal();
  Mat3 sigma = m * m.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

void validate(const GaussianPrimitive& g, std::size_t num_classes) {
  if (std::abs(g.quaternion().norm() - 1.0) > kRotationTolerance) {
    throw InvalidRotationError("gaussian rotation is not a unit quaternion");
  }
  for (int k = 0; k < 3; ++k) {
    // Stored as float; compare against the floor rounded the same way.
    if (!(g.scale[k] >= static_cast<float>(kScaleFloor))) {
      throw DomainError("gaussian scale below floor");
    }
  }
  if (!(g.opacity >= 0.0f && g.opacity <= 1.0f)) throw DomainError("gaussian opacity outside [0, 1]");
  if (g.semantics.size() != num_classes) {
    throw ShapeError("gaussian has " + std::to_string(g.semantics.size()) + " logits, expected " +
                     std::to_string(num_classes));
  }
}

void GaussianSet::validate() const {
  if (provenance.size() != primitives.size()) {
    throw ShapeError("provenance length does not match primitive count");
  }
  for (const auto& g : primitives) gaussocc::validate(g, num_classes);
}

Vec3 CameraModel::direction_at(double v, double u) const {
  const Vec3 cam((u - cx) / fx, (v - cy) / fy, 1.0);
  return (rotation * cam).normalized();
}

Vec3 CameraModel::pixel_ray(std::uint32_t row, std::uint32_t col) const {
  if (row >= height || col >= width) {
    throw IndexError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                     ") outside " + std::to_string(height) + "x" + std::to_string(width) + " image");
  }
  return direction_at(row + 0.5, col + 0.5);
}

std::optional<Eigen::Vector2d> CameraModel::project(const Vec3& world) const {
  const Vec3 cam = rotation.transpose() * (world - translation);
  if (!(cam.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(fy * cam.y() / cam.z() + cy, fx * cam.x() / cam.z() + cx);
}

CameraModel CameraModel::downsampled(std::uint32_t r) const {
  if (r == 0) throw ConfigError("downsample ratio must be positive");
  if (width % r != 0 || height % r != 0) {
    throw ConfigError("image size is not divisible by the downsample ratio");
  }
  CameraModel out = *this;
  out.fx = fx / r;
  out.fy = fy / r;
  out.cx = cx / r;
  out.cy = cy / r;
  out.width = width / r;
  out.height = height / r;
  return out;
}

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw ConfigError("camera focal lengths must be positive");
  if (width == 0 || height == 0) throw ConfigError("camera image size must be positive");
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-6) throw ConfigError("camera rotation is not orthonormal");
}

std::optional<std::array<std::uint32_t, 3>> GridGeometry::locate(const Vec3& p) const {
  std::array<std::uint32_t, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const double f = std::floor((p[k] - origin[k]) / voxel_size);
    if (!(f >= 0.0 && f < static_cast<double>(dims[k]))) return std::nullopt;
    out[k] = static_cast<std::uint32_t>(f);
  }
  return out;
}

void GridGeometry::validate() const {
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw ConfigError("grid dims must be positive");
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
}

void OccupancyGrid::validate() const {
  geometry.validate();
  if (labels.size() != geometry.num_voxels()) throw ShapeError("label count does not match grid dims");
  if (num_classes >= kUnknownLabel) throw ConfigError("too many classes for u8 labels");
  for (auto l : labels) {
    if (l > num_classes) throw DomainError("label exceeds the empty id");
  }
}

VoxelGridSpec::VoxelGridSpec(const Vec3& min, const Vec3& max, double grid_size)
    : min_(min), max_(max), grid_size_(grid_size) {
  if (!(grid_size > 0.0)) throw ConfigError("grid size must be positive");
  for (int k = 0; k < 3; ++k) {
    if (!(min[k] < max[k])) throw ConfigError("grid extents must satisfy min < max on every axis");
    lo_[k] = static_cast<std::int64_t>(std::floor(min[k] / grid_size));
    const auto hi = static_cast<std::int64_t>(std::ceil(max[k] / grid_size));
    dims_[k] = std::max<std::int64_t>(hi - lo_[k], 1);
  }
  if (static_cast<double>(dims_[0]) * dims_[1] * dims_[2] > 1.8e19) {
    throw ConfigError("sampling grid too large for 64-bit keys");
  }
}

void DepthMap::validate() const {
  if (depth.size() != size() || uncertainty.size() != size()) {
    throw ShapeError("depth map buffers do not match height x width");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(uncertainty[i] > 0.0f)) throw DomainError("depth uncertainty must be positive");
    if (!(depth[i] >= 0.0f)) throw DomainError("depth must be nonnegative or the no-return sentinel");
  }
}

}  // namespace gaussocc
