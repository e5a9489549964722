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

#include "gaussocc/metrics.hpp"

#include <string>

#include "gaussocc/distance_transform.hpp"
#include "gaussocc/errors.hpp"
#include "gaussocc/renderer.hpp"
#include "gaussocc/voxel_traversal.hpp"

namespace gaussocc {

IouResult iou_miou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint32_t num_classes,
                   std::uint8_t empty_id, std::uint8_t unknown_id) {
  if (pred.size() != gt.size()) {
    throw ShapeError("prediction has " + std::to_string(pred.size()) + " voxels, ground truth " +
                     std::to_string(gt.size()));
  }
  (void)empty_id;  // every label >= num_classes other than unknown is empty
  std::vector<std::uint64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == unknown_id) continue;
    const bool p_occ = pred[i] < num_classes;
    const bool g_occ = gt[i] < num_classes;
    inter += (p_occ && g_occ) ? 1 : 0;
    uni += (p_occ || g_occ) ? 1 : 0;
    if (p_occ && g_occ && pred[i] == gt[i]) {
      ++tp[pred[i]];
    } else {
      if (p_occ) ++fp[pred[i]];
      if (g_occ) ++fn[gt[i]];
    }
  }
  IouResult r;
  r.per_class.resize(num_classes);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    const std::uint64_t denom = tp[c] + fp[c] + fn[c];
    if (denom > 0) r.per_class[c] = double(tp[c]) / double(denom);
    if (tp[c] + fn[c] > 0) {
      sum += *r.per_class[c];
      ++present;
    }
  }
  if (present == 0) throw UndefinedMetricError("ground truth has no occupied voxel");
  r.iou = double(inter) / double(uni);
  r.miou = sum / double(present);
  return r;
}

IouResult iou_miou(const OccupancyGrid& pred, const OccupancyGrid& gt, std::uint8_t unknown_id) {
  if (!(pred.geometry == gt.geometry)) throw ShapeError("prediction and ground truth grids differ in geometry");
  if (pred.num_classes != gt.num_classes) throw ShapeError("prediction and ground truth class counts differ");
  return iou_miou(pred.labels, gt.labels, gt.num_classes, gt.empty_id(), unknown_id);
}

RayIouResult ray_iou(const OccupancyGrid& pred, const OccupancyGrid& gt, std::span<const CameraModel> cams,
                     std::span<const double> thresholds, std::uint32_t stride) {
  if (!(pred.geometry == gt.geometry)) throw ShapeError("prediction and ground truth grids differ in geometry");
  if (pred.num_classes != gt.num_classes) throw ShapeError("prediction and ground truth class counts differ");
  if (stride == 0) throw ConfigError("ray stride must be positive");
  if (thresholds.empty()) throw ConfigError("RayIoU needs at least one threshold");

  struct RaySpec {
    std::size_t cam;
    std::uint32_t row, col;
  };
  std::vector<RaySpec> specs;
  for (std::size_t c = 0; c < cams.size(); ++c) {
    for (std::uint32_t r = 0; r < cams[c].height; r += stride) {
      for (std::uint32_t q = 0; q < cams[c].width; q += stride) specs.push_back({c, r, q});
    }
  }

  struct RayResult {
    bool inside = false;
    std::optional<RayHit> pred, gt;
  };
  std::vector<RayResult> results(specs.size());
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const RaySpec& s = specs[static_cast<std::size_t>(i)];
    const CameraModel& cam = cams[s.cam];
    const Vec3 dir = cam.pixel_ray(s.row, s.col);
    RayResult& r = results[static_cast<std::size_t>(i)];
    r.inside = clip_ray_to_grid(gt.geometry, cam.origin(), dir).has_value();
    if (!r.inside) continue;
    r.pred = first_hit(pred, cam.origin(), dir);
    r.gt = first_hit(gt, cam.origin(), dir);
  }

  RayIouResult out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  for (const auto& r : results) out.rays += r.inside ? 1 : 0;
  if (out.rays == 0) throw UndefinedMetricError("no ray intersects the grid");

  const std::uint32_t nc = gt.num_classes;
  std::vector<bool> seen(nc, false);
  for (const auto& r : results) {
    if (r.pred) seen[r.pred->label] = true;
    if (r.gt) seen[r.gt->label] = true;
  }
  std::size_t n_seen = 0;
  for (bool s : seen) n_seen += s ? 1 : 0;
  if (n_seen == 0) throw UndefinedMetricError("no ray hits an occupied voxel in either grid");

  for (const double tau : thresholds) {
    std::vector<std::uint64_t> tp(nc, 0), fp(nc, 0), fn(nc, 0);
    for (const auto& r : results) {
      const bool match = r.pred && r.gt && r.pred->label == r.gt->label &&
                         std::abs(r.pred->distance - r.gt->distance) <= tau;
      if (match) {
        ++tp[r.gt->label];
        continue;
      }
      if (r.pred) ++fp[r.pred->label];
      if (r.gt) ++fn[r.gt->label];
    }
    double sum = 0.0;
    for (std::uint32_t c = 0; c < nc; ++c) {
      if (seen[c]) sum += double(tp[c]) / double(tp[c] + fp[c] + fn[c]);
    }
    out.per_threshold.push_back(sum / double(n_seen));
  }
  double total = 0.0;
  for (double v : out.per_threshold) total += v;
  out.mean = total / double(out.per_threshold.size());
  return out;
}

InitQuality init_quality(const GaussianSet& gs, const OccupancyGrid& gt) {
  const NearestOccupiedCenter nearest(gt);
  if (gs.empty()) throw UndefinedMetricError("initialization quality of an empty Gaussian set");
  std::vector<double> dist(gs.size());
  std::vector<std::uint8_t> inside(gs.size());
  const auto n = static_cast<std::ptrdiff_t>(gs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec3 p = gs.primitives[static_cast<std::size_t>(i)].mean_d();
    dist[static_cast<std::size_t>(i)] = nearest.distance(p);
    const auto v = gt.geometry.locate(p);
    inside[static_cast<std::size_t>(i)] = v && gt.occupied(gt.geometry.index((*v)[0], (*v)[1], (*v)[2])) ? 1 : 0;
  }
  CompensatedSum d;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    d.add(dist[i]);
    hits += inside[i];
  }
  return {100.0 * double(hits) / double(gs.size()), d.value() / double(gs.size())};
}

NearFarCounts near_far_counts(const GaussianSet& gs, const Vec3& center, double radius) {
  NearFarCounts c;
  for (const auto& g : gs.primitives) {
    if ((g.mean_d() - center).norm() < radius) ++c.near;
    else ++c.far;
  }
  return c;
}

}  // namespace gaussocc
