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

#include "gaussocc/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gaussocc/errors.hpp"
#include "gaussocc/random.hpp"

namespace gaussocc {
namespace {

Vec3 to_local(const Box& b, const Vec3& p) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const Vec3 d = p - b.center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 dir_to_local(const Box& b, const Vec3& v) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
}

Vec3 to_world(const Box& b, const Vec3& q) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  return b.center + Vec3(c * q.x() - s * q.y(), s * q.x() + c * q.y(), q.z());
}

std::optional<double> intersect_box(const Box& b, const Vec3& origin, const Vec3& dir) {
  const Vec3 o = to_local(b, origin);
  const Vec3 v = dir_to_local(b, dir);
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double h = b.half_extents[k];
    if (v[k] == 0.0) {
      if (std::abs(o[k]) > h) return std::nullopt;
      continue;
    }
    double a = (-h - o[k]) / v[k];
    double c = (h - o[k]) / v[k];
    if (a > c) std::swap(a, c);
    t0 = std::max(t0, a);
    t1 = std::min(t1, c);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

bool in_xy(const SceneSpec& s, const Vec3& p) {
  return p.x() >= s.extent_min.x() && p.x() < s.extent_max.x() && p.y() >= s.extent_min.y() &&
         p.y() < s.extent_max.y();
}

std::uint64_t pixel_counter(std::size_t view, std::uint32_t row, std::uint32_t col) {
  return (static_cast<std::uint64_t>(view) << 40) | (static_cast<std::uint64_t>(row) << 20) | col;
}

}  // namespace

bool Box::contains(const Vec3& p) const {
  const Vec3 q = to_local(*this, p);
  return std::abs(q.x()) <= half_extents.x() && std::abs(q.y()) <= half_extents.y() &&
         std::abs(q.z()) <= half_extents.z();
}

void SceneSpec::validate() const {
  if (num_classes == 0 || num_classes >= kUnknownLabel) {
    throw ConfigError("scene class count must be in [1, 254], got " + std::to_string(num_classes));
  }
  for (int k = 0; k < 3; ++k) {
    if (!(extent_min[k] < extent_max[k])) throw ConfigError("scene extents have zero volume");
  }
  if (has_ground && ground_class >= num_classes) throw ConfigError("ground class out of range");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    if (b.class_id >= num_classes) throw ConfigError("box " + std::to_string(i) + " class out of range");
    if ((b.half_extents.array() <= 0.0).any()) throw ConfigError("box " + std::to_string(i) + " has zero size");
    const double r = std::hypot(b.half_extents.x(), b.half_extents.y());
    const bool overlaps = b.center.x() + r > extent_min.x() && b.center.x() - r < extent_max.x() &&
                          b.center.y() + r > extent_min.y() && b.center.y() - r < extent_max.y() &&
                          b.center.z() + b.half_extents.z() > extent_min.z() &&
                          b.center.z() - b.half_extents.z() < extent_max.z();
    if (!overlaps) throw ConfigError("box " + std::to_string(i) + " lies outside the scene extents");
  }
}

namespace {

void snap_box(Box& b, const SceneConfig& config, double base) {
  const double v = config.snap;
  if (std::lround(b.yaw / (0.5 * std::numbers::pi)) % 2 == 1) std::swap(b.half_extents.x(), b.half_extents.y());
  b.yaw = 0.0;
  auto to_lattice = [&](double x, int k) { return config.extent_min[k] + std::round((x - config.extent_min[k]) / v) * v; };
  for (int k = 0; k < 2; ++k) {
    double lo = to_lattice(b.center[k] - b.half_extents[k], k);
    double hi = to_lattice(b.center[k] + b.half_extents[k], k);
    if (hi <= lo) hi = lo + v;
    b.center[k] = 0.5 * (lo + hi);
    b.half_extents[k] = 0.5 * (hi - lo);
  }
  double top = to_lattice(base + 2.0 * b.half_extents.z(), 2);
  if (top <= base) top += v;
  if (top > config.extent_max.z()) top -= v;
  b.center.z() = 0.5 * (base + top);
  b.half_extents.z() = 0.5 * (top - base);
}

}  // namespace

SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& config) {
  for (int k = 0; k < 3; ++k) {
    if (!(config.extent_min[k] < config.extent_max[k])) throw ConfigError("scene extents have zero volume");
  }
  if (!(config.snap >= 0.0)) throw ConfigError("snap pitch must be nonnegative");
  if (config.num_classes == 0) throw ConfigError("scene needs at least one class");
  if (!(config.min_half_extent > 0.0) || config.max_half_extent < config.min_half_extent ||
      config.max_half_height < config.min_half_extent) {
    throw ConfigError("invalid box size range");
  }

  SceneSpec s;
  s.seed = seed;
  s.num_classes = config.num_classes;
  s.extent_min = config.extent_min;
  s.extent_max = config.extent_max;
  s.has_ground = config.has_ground;
  s.ground_z = config.ground_z;
  s.ground_class = config.ground_class;

  const double margin = config.max_half_extent * std::numbers::sqrt2;
  const double lo_x = config.extent_min.x() + margin, hi_x = config.extent_max.x() - margin;
  const double lo_y = config.extent_min.y() + margin, hi_y = config.extent_max.y() - margin;
  const double base = config.has_ground ? config.ground_z : config.extent_min.z();
  if (config.num_boxes > 0) {
    if (!(lo_x < hi_x) || !(lo_y < hi_y)) throw ConfigError("scene extents too small for the box size range");
    if (base + 2.0 * config.max_half_height > config.extent_max.z()) {
      throw ConfigError("boxes would rise above the scene extents");
    }
  }

  SplitMix64 rng(seed);
  for (std::uint32_t i = 0; i < config.num_boxes; ++i) {
    Box b;
    bool placed = false;
    for (int attempt = 0; attempt < 256 && !placed; ++attempt) {
      b.center.x() = rng.uniform(lo_x, hi_x);
      b.center.y() = rng.uniform(lo_y, hi_y);
      placed = std::hypot(b.center.x(), b.center.y()) >= config.clear_radius;
    }
    if (!placed) throw ConfigError("could not place box outside the clear radius");
    b.half_extents.x() = rng.uniform(config.min_half_extent, config.max_half_extent);
    b.half_extents.y() = rng.uniform(config.min_half_extent, config.max_half_extent);
    b.half_extents.z() = rng.uniform(config.min_half_extent, config.max_half_height);
    b.center.z() = base + b.half_extents.z();
    b.yaw = rng.uniform(0.0, std::numbers::pi);
    if (config.snap > 0.0) snap_box(b, config, base);
    if (config.num_classes < 2) {
      b.class_id = 0;
    } else if (config.has_ground && config.ground_class < config.num_classes) {
      auto c = static_cast<std::uint32_t>(rng.next() % (config.num_classes - 1));
      b.class_id = c >= config.ground_class ? c + 1 : c;
    } else {
      b.class_id = static_cast<std::uint32_t>(rng.next() % config.num_classes);
    }
    s.boxes.push_back(b);
  }
  return s;
}

OccupancyGrid rasterize_gt_grid(const SceneSpec& scene, const GridGeometry& geometry) {
  scene.validate();
  geometry.validate();
  OccupancyGrid grid(geometry, scene.num_classes);
  const auto n = static_cast<std::ptrdiff_t>(geometry.num_voxels());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec3 c = geometry.center(static_cast<std::size_t>(i));
    std::uint8_t label = grid.empty_id();
    if (scene.has_ground && c.z() < scene.ground_z && in_xy(scene, c)) {
      label = static_cast<std::uint8_t>(scene.ground_class);
    }
    for (const Box& b : scene.boxes) {
      if (b.contains(c)) label = static_cast<std::uint8_t>(b.class_id);
    }
    grid.labels[static_cast<std::size_t>(i)] = label;
  }
  return grid;
}

std::optional<SurfaceHit> intersect_scene(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<SurfaceHit> best;
  if (scene.has_ground && origin.z() >= scene.ground_z && dir.z() < 0.0) {
    const double t = (scene.ground_z - origin.z()) / dir.z();
    if (in_xy(scene, origin + t * dir)) best = SurfaceHit{t, scene.ground_class};
  }
  for (const Box& b : scene.boxes) {
    const auto t = intersect_box(b, origin, dir);
    // Ties go to the later box, matching the rasterizer's override order.
    if (t && (!best || *t <= best->distance)) best = SurfaceHit{*t, b.class_id};
  }
  return best;
}

std::vector<DepthMap> render_depth_maps(const SceneSpec& scene, std::span<const CameraModel> cams,
                                        const DepthRenderOptions& options) {
  scene.validate();
  if (!(options.noise_std >= 0.0)) throw ConfigError("depth noise must be nonnegative");
  const auto sigma = static_cast<float>(std::max(options.noise_std, 1e-3));
  std::vector<DepthMap> maps;
  for (std::size_t v = 0; v < cams.size(); ++v) {
    const CameraModel& cam = cams[v];
    cam.validate();
    DepthMap m(cam.height, cam.width);
    const auto h = static_cast<std::ptrdiff_t>(cam.height);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < h; ++r) {
      const auto row = static_cast<std::uint32_t>(r);
      for (std::uint32_t col = 0; col < cam.width; ++col) {
        const std::size_t i = m.index(row, col);
        m.uncertainty[i] = sigma;
        const auto hit = intersect_scene(scene, cam.origin(), cam.pixel_ray(row, col));
        if (!hit) continue;
        double d = hit->distance;
        if (options.noise_std > 0.0) {
          d = std::max(0.0, d + options.noise_std * counter_normal(options.noise_seed, pixel_counter(v, row, col)));
        }
        m.depth[i] = static_cast<float>(d);
      }
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

std::vector<std::vector<int>> render_class_maps(const SceneSpec& scene, std::span<const CameraModel> cams) {
  scene.validate();
  std::vector<std::vector<int>> maps;
  for (const CameraModel& cam : cams) {
    std::vector<int> m(std::size_t{cam.height} * cam.width, -1);
    const auto h = static_cast<std::ptrdiff_t>(cam.height);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < h; ++r) {
      const auto row = static_cast<std::uint32_t>(r);
      for (std::uint32_t col = 0; col < cam.width; ++col) {
        const auto hit = intersect_scene(scene, cam.origin(), cam.pixel_ray(row, col));
        if (hit) m[std::size_t{row} * cam.width + col] = static_cast<int>(hit->class_id);
      }
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

Vec3 nearest_surface_point(const SceneSpec& scene, const Vec3& p) {
  Vec3 best = p;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec3& q) {
    const double d = (q - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  };
  if (scene.has_ground) {
    consider({std::clamp(p.x(), scene.extent_min.x(), scene.extent_max.x()),
              std::clamp(p.y(), scene.extent_min.y(), scene.extent_max.y()), scene.ground_z});
  }
  for (const Box& b : scene.boxes) {
    Vec3 q = to_local(b, p);
    const Vec3& h = b.half_extents;
    const bool inside = (q.array().abs() <= h.array()).all();
    if (inside) {
      int axis = 0;
      double slack = h[0] - std::abs(q[0]);
      for (int k = 1; k < 3; ++k) {
        if (h[k] - std::abs(q[k]) < slack) {
          slack = h[k] - std::abs(q[k]);
          axis = k;
        }
      }
      q[axis] = q[axis] < 0.0 ? -h[axis] : h[axis];
    } else {
      for (int k = 0; k < 3; ++k) q[k] = std::clamp(q[k], -h[k], h[k]);
    }
    consider(to_world(b, q));
  }
  return best;
}

std::vector<CameraModel> surround6(const RigConfig& rig) {
  if (rig.width == 0 || rig.height == 0) throw ConfigError("rig image size must be positive");
  if (!(rig.hfov_deg > 0.0 && rig.hfov_deg < 180.0)) throw ConfigError("rig field of view must be in (0, 180)");
  const double deg = std::numbers::pi / 180.0;
  const double f = 0.5 * rig.width / std::tan(0.5 * rig.hfov_deg * deg);
  const double phi = rig.pitch_deg * deg;
  std::vector<CameraModel> cams;
  for (int i = 0; i < 6; ++i) {
    const double theta = i * 60.0 * deg;
    const Vec3 fwd(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), -std::sin(phi));
    const Vec3 right(std::sin(theta), -std::cos(theta), 0.0);
    const Vec3 down = fwd.cross(right);
    CameraModel c;
    c.fx = c.fy = f;
    c.cx = 0.5 * rig.width;
    c.cy = 0.5 * rig.height;
    c.width = rig.width;
    c.height = rig.height;
    c.rotation.col(0) = right;
    c.rotation.col(1) = down;
    c.rotation.col(2) = fwd;
    c.translation = rig.position;
    cams.push_back(c);
  }
  return cams;
}

GaussianSet random_gaussians(std::size_t count, const Vec3& lo, const Vec3& hi, std::uint64_t seed,
                             const RandomGaussianOptions& options) {
  GaussianSet gs;
  gs.num_classes = options.num_classes;
  gs.primitives.resize(count);
  gs.provenance.resize(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // One generator per primitive keeps the output independent of the schedule.
    SplitMix64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    GaussianPrimitive& g = gs.primitives[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k) g.mean[k] = static_cast<float>(rng.uniform(lo[k], hi[k]));
    // float rounding can land exactly on hi; keep the half-open range.
    for (int k = 0; k < 3; ++k) {
      if (!(g.mean[k] < hi[k])) g.mean[k] = std::nextafter(static_cast<float>(hi[k]), -INFINITY);
    }
    for (int k = 0; k < 3; ++k) g.scale[k] = static_cast<float>(rng.uniform(options.min_scale, options.max_scale));
    double q[4];
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& c : q) {
        c = rng.normal();
        norm += c * c;
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (int k = 0; k < 4; ++k) g.rotation[k] = static_cast<float>(q[k] / norm);
    g.opacity = static_cast<float>(rng.uniform());
    g.semantics.resize(options.num_classes);
    for (float& c : g.semantics) c = static_cast<float>(rng.normal());
    gs.provenance[static_cast<std::size_t>(i)] = {0, 0, static_cast<std::uint32_t>(i)};
  }
  return gs;
}

GridGeometry scene_grid(const SceneSpec& scene, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  GridGeometry g;
  g.origin = scene.extent_min;
  g.voxel_size = voxel_size;
  for (int k = 0; k < 3; ++k) {
    const double n = (scene.extent_max[k] - scene.extent_min[k]) / voxel_size;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, r)) {
      throw ConfigError("scene extents are not a whole number of voxels");
    }
    g.dims[k] = static_cast<std::uint32_t>(r);
  }
  return g;
}

}  // namespace gaussocc
