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

#include <algorithm>
#include <map>
#include <set>

#include "gaussocc/grid_sampler.hpp"
#include "gaussocc/parallel.hpp"
#include "gaussocc/radix_sort.hpp"
#include "gaussocc/random.hpp"
#include "gaussocc/reference/serial.hpp"
#include "gaussocc/synth.hpp"
#include "oracles.hpp"

using namespace gaussocc;

namespace {

GaussianSet at_points(const std::vector<Vec3>& pts) {
  GaussianSet gs;
  gs.num_classes = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    GaussianPrimitive g;
    g.mean = pts[i].cast<float>();
    g.scale = Eigen::Vector3f::Constant(0.1f);
    g.opacity = 0.5f;
    g.semantics = {float(i)};
    gs.push_back(g, {0, 0, static_cast<std::uint32_t>(i)});
  }
  return gs;
}

const Vec3 kLo(-10, -10, -3), kHi(10, 10, 3);

}  // namespace

TEST(VoxelizeKey, FloorTowardNegativeInfinity) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  const auto k = voxelize_key(Vec3(1.2, -0.7, 0.3), spec);
  ASSERT_TRUE(k);
  EXPECT_EQ(k->coord, (std::array<std::int64_t, 3>{2, -2, 0}));
}

TEST(VoxelizeKey, HalfOpenBoundary) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  EXPECT_EQ(voxelize_key(Vec3(1.0, 0, 0), spec)->coord[0], 2);
  EXPECT_FALSE(voxelize_key(Vec3(10.0, 0, 0), spec));
  EXPECT_TRUE(voxelize_key(Vec3(-10.0, 0, 0), spec));
  EXPECT_FALSE(voxelize_key(Vec3(0, 0, 3.5), spec));
}

TEST(VoxelizeKey, InjectiveAndRoundTripsAgainstMap) {
  const VoxelGridSpec spec(kLo, kHi, 0.37);
  SplitMix64 rng(1);
  std::map<std::array<std::int64_t, 3>, std::uint64_t> seen;
  std::map<std::uint64_t, std::array<std::int64_t, 3>> back;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-3, 3));
    const auto k = voxelize_key(p, spec);
    ASSERT_TRUE(k);
    const std::array<std::int64_t, 3> v{(std::int64_t)std::floor(p.x() / 0.37), (std::int64_t)std::floor(p.y() / 0.37),
                                         (std::int64_t)std::floor(p.z() / 0.37)};
    EXPECT_EQ(k->coord, v);
    EXPECT_EQ(key_to_coord(k->key, spec), v);
    auto [it, fresh] = seen.emplace(v, k->key);
    if (!fresh) EXPECT_EQ(it->second, k->key);
    auto [jt, fresh_key] = back.emplace(k->key, v);
    if (!fresh_key) EXPECT_EQ(jt->second, v);
  }
}

TEST(RadixSort, StableAndSorted) {
  SplitMix64 rng(2);
  for (int bits : {1, 7, 8, 13, 20, 64}) {
    std::vector<KeyIndex> v(5000);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::uint64_t mask = bits == 64 ? ~0ULL : ((1ULL << bits) - 1);
      v[i] = {rng.next() & mask, i};
    }
    auto expect = v;
    std::stable_sort(expect.begin(), expect.end(), [](auto& a, auto& b) { return a.key < b.key; });
    radix_sort_by_key(v, bits);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(v[i].key, expect[i].key);
      EXPECT_EQ(v[i].index, expect[i].index);
    }
  }
}

TEST(Sample, DistinctVoxelsUnchangedInKeyOrder) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  const auto gs = at_points({{3.1, 0.2, 0.2}, {-4.2, 1.1, -1.0}, {0.3, 0.3, 0.3}, {0.3, -5.3, 2.9}});
  const auto out = sample_representatives(gs, spec, 7);
  ASSERT_EQ(out.size(), 4u);
  std::vector<std::uint64_t> keys;
  for (const auto& g : out.primitives) keys.push_back(voxelize_key(g.mean_d(), spec)->key);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  for (const auto& g : gs.primitives) EXPECT_NE(std::find(out.primitives.begin(), out.primitives.end(), g), out.primitives.end());
}

TEST(Sample, SingleVoxelKeepsOneInput) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  SplitMix64 rng(3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(rng.uniform(1.0, 1.49), rng.uniform(1.0, 1.49), rng.uniform(0.0, 0.49));
  const auto gs = at_points(pts);
  const auto out = sample_representatives(gs, spec, 99);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NE(std::find(gs.primitives.begin(), gs.primitives.end(), out.primitives[0]), gs.primitives.end());
  const auto idx = out.provenance[0].col;
  EXPECT_EQ(idx, representative_offset(99, voxelize_key(pts[0], spec)->key, 50));
}

TEST(Sample, DifferentSeedsPickDifferentMembers) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  std::vector<Vec3> pts(40, Vec3(1.2, 1.2, 0.2));
  const auto gs = at_points(pts);
  std::set<std::uint32_t> picks;
  for (std::uint64_t s = 0; s < 20; ++s) picks.insert(sample_representatives(gs, spec, s).provenance[0].col);
  EXPECT_GT(picks.size(), 5u);
}

TEST(Sample, MatchesDictionaryOracle) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  for (std::uint64_t s = 0; s < 20; ++s) {
    // Means spill past the extents so out-of-bounds handling is exercised.
    const auto gs = random_gaussians(3000, Vec3(-12, -12, -4), Vec3(12, 12, 4), s, {0.1, 0.5, 2});
    const auto groups = oracle::group_cells(gs, kLo, kHi, 0.5);
    const auto out = sample_representatives(gs, spec, s);
    ASSERT_EQ(out.size(), groups.size());
    EXPECT_EQ(out, reference::sample_representatives(gs, spec, s));
    EXPECT_EQ(reference::count_occupied_voxels(gs, spec), groups.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t src = out.provenance[i].col;
      EXPECT_EQ(out.primitives[i], gs.primitives[src]);
    }
  }
}

TEST(Sample, IdempotentAndThreadIndependent) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  const auto gs = random_gaussians(20000, kLo, kHi, 5, {0.1, 0.5, 2});
  GaussianSet one, four;
  {
    parallel::ScopedThreadCount t(1);
    one = sample_representatives(gs, spec, 5);
  }
  {
    parallel::ScopedThreadCount t(4);
    four = sample_representatives(gs, spec, 5);
  }
  EXPECT_EQ(one, four);
  EXPECT_EQ(sample_representatives(one, spec, 5), one);
}

TEST(Sample, EmptyInput) {
  const VoxelGridSpec spec(kLo, kHi, 0.5);
  GaussianSet gs;
  gs.num_classes = 3;
  const auto out = sample_representatives(gs, spec, 1);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.num_classes, 3u);
}
