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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "gaussocc/distance_transform.hpp"
#include "gaussocc/errors.hpp"
#include "gaussocc/metrics.hpp"
#include "gaussocc/random.hpp"
#include "gaussocc/reference/serial.hpp"
#include "gaussocc/voxel_traversal.hpp"
#include "oracles.hpp"

using namespace gaussocc;

namespace {

GridGeometry cube(std::uint32_t n, double voxel = 0.5, Vec3 origin = Vec3::Zero()) {
  GridGeometry g;
  g.dims = {n, n, n};
  g.origin = origin;
  g.voxel_size = voxel;
  return g;
}

OccupancyGrid random_grid(const GridGeometry& g, std::uint32_t c, double fill, SplitMix64& rng) {
  OccupancyGrid o(g, c);
  for (auto& l : o.labels) {
    if (rng.uniform() < fill) l = static_cast<std::uint8_t>(rng.next() % c);
  }
  return o;
}

void fill_box(OccupancyGrid& o, std::array<std::uint32_t, 3> lo, std::array<std::uint32_t, 3> hi, std::uint8_t label) {
  for (std::uint32_t x = lo[0]; x < hi[0]; ++x)
    for (std::uint32_t y = lo[1]; y < hi[1]; ++y)
      for (std::uint32_t z = lo[2]; z < hi[2]; ++z) o.labels[o.geometry.index(x, y, z)] = label;
}

GaussianSet at_points(const std::vector<Vec3>& pts) {
  GaussianSet gs;
  gs.num_classes = 1;
  for (const auto& p : pts) {
    GaussianPrimitive g;
    g.mean = p.cast<float>();
    g.scale = Eigen::Vector3f::Constant(0.1f);
    g.semantics = {0.0f};
    gs.push_back(g, {});
  }
  return gs;
}

}  // namespace

TEST(IouMiou, Identity) {
  SplitMix64 rng(1);
  const auto g = random_grid(cube(8), 3, 0.3, rng);
  const auto r = iou_miou(g, g);
  EXPECT_EQ(r.iou, 1.0);
  EXPECT_EQ(r.miou, 1.0);
}

TEST(IouMiou, AllEmptyPrediction) {
  SplitMix64 rng(2);
  const auto gt = random_grid(cube(8), 3, 0.3, rng);
  const auto r = iou_miou(OccupancyGrid(gt.geometry, 3), gt);
  EXPECT_EQ(r.iou, 0.0);
  EXPECT_EQ(r.miou, 0.0);
}

TEST(IouMiou, MatchesSetArithmetic) {
  SplitMix64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto pred = random_grid(cube(8), 4, 0.4, rng);
    auto gt = random_grid(cube(8), 4, 0.4, rng);
    for (auto& l : gt.labels) {
      if (rng.uniform() < 0.1) l = kUnknownLabel;
    }
    std::set<std::size_t> po, go;
    std::map<int, std::set<std::size_t>> pc, gc;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      if (gt.labels[i] == kUnknownLabel) continue;
      if (pred.labels[i] < 4) po.insert(i), pc[pred.labels[i]].insert(i);
      if (gt.labels[i] < 4) go.insert(i), gc[gt.labels[i]].insert(i);
    }
    auto inter = [](const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
      std::size_t n = 0;
      for (auto x : a) n += b.count(x);
      return n;
    };
    const double iou = double(inter(po, go)) / double(po.size() + go.size() - inter(po, go));
    double miou = 0;
    int present = 0;
    for (int c = 0; c < 4; ++c) {
      if (gc[c].empty()) continue;
      const auto i = inter(pc[c], gc[c]);
      miou += double(i) / double(pc[c].size() + gc[c].size() - i);
      ++present;
    }
    miou /= present;
    // The unknown label is excluded through the span overload.
    const auto r = iou_miou(pred.labels, gt.labels, 4, 4, kUnknownLabel);
    EXPECT_DOUBLE_EQ(r.iou, iou);
    EXPECT_DOUBLE_EQ(r.miou, miou);
    // Binary IoU is symmetric.
    auto gt_clean = gt;
    for (auto& l : gt_clean.labels) {
      if (l == kUnknownLabel) l = 4;
    }
    EXPECT_DOUBLE_EQ(iou_miou(pred, gt_clean).iou, iou_miou(gt_clean, pred).iou);
  }
}

TEST(IouMiou, DimMismatchThrows) {
  EXPECT_THROW(iou_miou(OccupancyGrid(cube(4), 2), OccupancyGrid(cube(5), 2)), ShapeError);
}

TEST(Traversal, VisitsVoxelsInOrderAgainstSlabOracle) {
  const auto g = cube(8, 0.5, Vec3(-2, -2, -2));
  SplitMix64 rng(4);
  for (int t = 0; t < 300; ++t) {
    const Vec3 o(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
    const Vec3 d = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    std::vector<std::pair<double, std::size_t>> expect;
    for (std::size_t i = 0; i < g.num_voxels(); ++i) {
      const auto c = g.coord(i);
      const Vec3 lo = g.origin + 0.5 * Vec3(c[0], c[1], c[2]);
      const auto hit = oracle::slab(o, d, lo, lo + Vec3::Constant(0.5));
      if (hit) expect.emplace_back(*hit, i);
    }
    std::sort(expect.begin(), expect.end());
    std::vector<std::size_t> got;
    traverse_voxels(g, o, d, [&](std::uint32_t x, std::uint32_t y, std::uint32_t z, double) {
      got.push_back(g.index(x, y, z));
      return false;
    });
    // Grazing contacts of zero length may be reported by the slab test only.
    std::vector<std::size_t> expect_idx;
    for (auto& e : expect) expect_idx.push_back(e.second);
    if (got.size() != expect_idx.size()) {
      std::set<std::size_t> a(got.begin(), got.end());
      for (auto i : a) EXPECT_NE(std::find(expect_idx.begin(), expect_idx.end(), i), expect_idx.end());
      continue;
    }
    EXPECT_EQ(got, expect_idx);
  }
}

TEST(RayIou, IdentityIsOne) {
  SplitMix64 rng(5);
  const auto g = random_grid(cube(8, 0.5, Vec3(-2, -2, 0)), 3, 0.05, rng);
  CameraModel cam;
  cam.width = 32;
  cam.height = 24;
  cam.fx = cam.fy = 20;
  cam.cx = 16;
  cam.cy = 12;
  cam.translation = Vec3(0.13, 0.07, -3);
  const std::vector<CameraModel> cams{cam};
  const auto r = ray_iou(g, g, cams, kDefaultRayThresholds, 1);
  for (double v : r.per_threshold) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(r.mean, 1.0);
}

TEST(RayIou, EmptyPredictionIsZero) {
  SplitMix64 rng(6);
  const auto g = random_grid(cube(8, 0.5, Vec3(-2, -2, 0)), 3, 0.05, rng);
  CameraModel cam;
  cam.width = cam.height = 16;
  cam.fx = cam.fy = 10;
  cam.cx = cam.cy = 8;
  cam.translation = Vec3(0.1, 0.2, -3);
  const std::vector<CameraModel> cams{cam};
  EXPECT_EQ(ray_iou(OccupancyGrid(g.geometry, 3), g, cams, kDefaultRayThresholds, 1).mean, 0.0);
}

TEST(RayIou, HandPlacedBoxesMatchPerRayEnumeration) {
  const auto geom = cube(8, 1.0, Vec3(-4, -4, 0));
  OccupancyGrid gt(geom, 3), pred(geom, 3);
  fill_box(gt, {0, 0, 5}, {3, 3, 7}, 0);
  fill_box(gt, {5, 5, 3}, {8, 7, 5}, 1);
  fill_box(gt, {3, 1, 6}, {5, 3, 8}, 2);
  fill_box(gt, {1, 5, 2}, {3, 7, 3}, 1);
  // Prediction: one box shifted back by two voxels, one relabeled, one missing.
  fill_box(pred, {0, 0, 5}, {3, 3, 7}, 0);
  fill_box(pred, {5, 5, 5}, {8, 7, 7}, 1);
  fill_box(pred, {3, 1, 6}, {5, 3, 8}, 1);
  CameraModel cam;
  cam.width = 40;
  cam.height = 40;
  cam.fx = cam.fy = 18;
  cam.cx = cam.cy = 20;
  cam.translation = Vec3(0.137, -0.071, -2.0);
  const std::vector<CameraModel> cams{cam};
  const std::vector<double> taus{1.0, 2.0, 4.0};
  const auto r = ray_iou(pred, gt, cams, taus, 2);

  std::vector<std::optional<oracle::Hit>> hp, hg;
  for (std::uint32_t row = 0; row < 40; row += 2)
    for (std::uint32_t col = 0; col < 40; col += 2) {
      const Vec3 v = cam.pixel_ray(row, col);
      hp.push_back(oracle::first_hit(pred, cam.translation, v));
      hg.push_back(oracle::first_hit(gt, cam.translation, v));
    }
  std::set<int> seen;
  for (std::size_t i = 0; i < hp.size(); ++i) {
    if (hp[i]) seen.insert(hp[i]->label);
    if (hg[i]) seen.insert(hg[i]->label);
  }
  ASSERT_EQ(seen.size(), 3u);
  for (std::size_t t = 0; t < taus.size(); ++t) {
    std::map<int, int> tp, fp, fn;
    for (std::size_t i = 0; i < hp.size(); ++i) {
      if (hp[i] && hg[i] && hp[i]->label == hg[i]->label && std::abs(hp[i]->distance - hg[i]->distance) <= taus[t]) {
        ++tp[hg[i]->label];
      } else {
        if (hp[i]) ++fp[hp[i]->label];
        if (hg[i]) ++fn[hg[i]->label];
      }
    }
    double m = 0;
    for (int c : seen) m += double(tp[c]) / double(tp[c] + fp[c] + fn[c]);
    EXPECT_DOUBLE_EQ(r.per_threshold[t], m / double(seen.size()));
  }
  EXPECT_LE(r.per_threshold[0], r.per_threshold[1]);
  EXPECT_LE(r.per_threshold[1], r.per_threshold[2]);
}

TEST(RayIou, NoRayInsideGridThrows) {
  const auto g = cube(4);
  CameraModel cam;
  cam.width = cam.height = 4;
  cam.translation = Vec3(0, 0, -5);
  cam.rotation << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // looking away
  const std::vector<CameraModel> cams{cam};
  EXPECT_THROW(ray_iou(OccupancyGrid(g, 2), OccupancyGrid(g, 2), cams, kDefaultRayThresholds, 1),
               UndefinedMetricError);
}

TEST(DistanceTransform, MatchesBruteForceOnLattice) {
  SplitMix64 rng(7);
  const auto g = random_grid(cube(12), 2, 0.02, rng);
  const NearestOccupiedCenter dt(g);
  for (std::size_t i = 0; i < g.labels.size(); ++i) {
    const double d = oracle::nearest_occupied(g, g.geometry.center(i));
    EXPECT_NEAR(std::sqrt(dt.lattice_sq(i)) * 0.5, d, 1e-12);
  }
}

TEST(InitQuality, CenterPlacedIsPerfect) {
  SplitMix64 rng(8);
  const auto g = random_grid(cube(8), 2, 0.2, rng);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < g.labels.size(); ++i) {
    if (g.occupied(i)) pts.push_back(g.geometry.center(i));
  }
  const auto q = init_quality(at_points(pts), g);
  EXPECT_EQ(q.perc, 100.0);
  EXPECT_NEAR(q.dist, 0.0, 1e-6);
}

TEST(InitQuality, SinglePairAlongAxis) {
  OccupancyGrid g(cube(8), 1);
  g.labels[g.geometry.index(3, 3, 3)] = 0;
  const Vec3 c = g.geometry.center(3, 3, 3);
  const auto q = init_quality(at_points({c + Vec3(0.5, 0, 0)}), g);
  EXPECT_NEAR(q.dist, 0.5, 1e-6);
  EXPECT_EQ(q.perc, 0.0);
}

TEST(InitQuality, RandomMatchesAllPairsSearch) {
  SplitMix64 rng(9);
  const auto g = random_grid(cube(16, 0.5, Vec3(-4, -4, -4)), 3, 0.01, rng);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6));
  const auto gs = at_points(pts);
  double dist = 0;
  int inside = 0;
  for (const auto& gp : gs.primitives) {
    const Vec3 p = gp.mean_d();
    dist += oracle::nearest_occupied(g, p);
    EXPECT_NEAR(reference::nearest_occupied_distance(g, p), oracle::nearest_occupied(g, p), 1e-12);
    const Vec3 rel = (p - g.geometry.origin) / 0.5;
    if ((rel.array() >= 0).all() && (rel.array() < 16).all()) {
      const auto x = std::uint32_t(std::floor(rel.x())), y = std::uint32_t(std::floor(rel.y())),
                 z = std::uint32_t(std::floor(rel.z()));
      inside += g.occupied(g.geometry.index(x, y, z));
    }
  }
  const auto q = init_quality(gs, g);
  EXPECT_NEAR(q.dist, dist / 1000.0, 1e-6);
  EXPECT_DOUBLE_EQ(q.perc, 100.0 * inside / 1000.0);
}

TEST(InitQuality, EmptyGridThrows) {
  EXPECT_THROW(init_quality(at_points({Vec3::Zero()}), OccupancyGrid(cube(4), 2)), UndefinedMetricError);
}

TEST(NearFar, Counts) {
  const auto gs = at_points({Vec3(1, 0, 0), Vec3(9.9, 0, 0), Vec3(10, 0, 0), Vec3(0, 30, 0)});
  const auto c = near_far_counts(gs, Vec3::Zero(), 10.0);
  EXPECT_EQ(c.near, 2u);
  EXPECT_EQ(c.far, 2u);
  EXPECT_DOUBLE_EQ(c.ratio(), 1.0);
}
