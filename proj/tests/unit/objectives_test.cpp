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
#include <cmath>

#include "gaussocc/errors.hpp"
#include "gaussocc/objectives.hpp"
#include "gaussocc/random.hpp"
#include "oracles.hpp"

using namespace gaussocc;

namespace {

std::vector<double> random_probs(std::size_t n, std::size_t c, SplitMix64& rng) {
  std::vector<double> p(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t k = 0; k < c; ++k) s += p[i * c + k] = rng.uniform() + 1e-3;
    for (std::size_t k = 0; k < c; ++k) p[i * c + k] /= s;
  }
  return p;
}

// Same formula as documented, written as direct sums over pixels.
DepthLossBreakdown depth_oracle(const std::vector<DepthMap>& pred, const std::vector<DepthMap>& gt, double alpha) {
  DepthLossBreakdown out;
  for (std::size_t v = 0; v < pred.size(); ++v) {
    const auto& p = pred[v];
    const auto& g = gt[v];
    const int h = int(p.height), w = int(p.width);
    auto ok = [&](int r, int c) { return std::isfinite(p.depth[r * w + c]) && std::isfinite(g.depth[r * w + c]); };
    double a = 0, b = 0, l = 0;
    int na = 0, nb = 0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (!ok(r, c)) continue;
        const double s = p.uncertainty[r * w + c];
        a += std::pow(s * (double(p.depth[r * w + c]) - g.depth[r * w + c]), 2);
        l += std::log(s);
        ++na;
        const int nbrs[2][2] = {{r, c + 1}, {r + 1, c}};
        for (const auto& q : nbrs) {
          if (q[0] >= h || q[1] >= w || !ok(q[0], q[1])) continue;
          const double gp = double(p.depth[q[0] * w + q[1]]) - p.depth[r * w + c];
          const double gg = double(g.depth[q[0] * w + q[1]]) - g.depth[r * w + c];
          b += std::pow(s * (gp - gg), 2);
          ++nb;
        }
      }
    if (na) {
      out.depth_term += std::sqrt(a / na);
      out.uncertainty_term -= alpha * l / na;
    }
    if (nb) out.gradient_term += std::sqrt(b / nb);
  }
  return out;
}

}  // namespace

TEST(CrossEntropy, PerfectPredictionIsZero) {
  const std::vector<double> p{1, 0, 0, 0, 1, 0, 0, 0, 1};
  const std::vector<int> t{0, 1, 2};
  EXPECT_LE(cross_entropy_loss(p, 3, t), 1e-6);
}

TEST(CrossEntropy, UniformTwoClassIsLn2) {
  const std::vector<double> p{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> t{0, 1};
  EXPECT_NEAR(cross_entropy_loss(p, 2, t), std::log(2.0), 1e-9);
}

TEST(CrossEntropy, MatchesScalarLoopWithIgnoreAndClamp) {
  SplitMix64 rng(1);
  auto p = random_probs(64, 4, rng);
  p[0] = 0.0;  // exercise the clamp
  p[1] = 0.5, p[2] = 0.25, p[3] = 0.25;
  std::vector<int> t(64);
  for (auto& x : t) x = int(rng.next() % 5) - 1;
  t[0] = 0;
  double s = 0;
  int n = 0;
  for (int i = 0; i < 64; ++i) {
    if (t[i] < 0) continue;
    s += -std::log(std::clamp(p[i * 4 + t[i]], 1e-7, 1.0));
    ++n;
  }
  EXPECT_NEAR(cross_entropy_loss(p, 4, t), s / n, 1e-9);
}

TEST(CrossEntropy, Errors) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW(cross_entropy_loss(p, 2, std::vector<int>{-1}), UndefinedMetricError);
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(cross_entropy_loss(bad, 2, std::vector<int>{0}), DomainError);
  EXPECT_THROW(cross_entropy_loss(p, 2, std::vector<int>{0, 1}), ShapeError);
}

TEST(Lovasz, PerfectIsZero) {
  const std::vector<double> p{1, 0, 0, 1, 1, 0};
  EXPECT_EQ(lovasz_softmax_loss(p, 2, std::vector<int>{0, 1, 0}), 0.0);
}

TEST(Lovasz, SingleVoxel) {
  const std::vector<double> p{0.7, 0.3};
  EXPECT_NEAR(lovasz_softmax_loss(p, 2, std::vector<int>{1}), 0.7, 1e-12);
}

TEST(Lovasz, AllSixVoxelPatternsMatchPrefixJaccard) {
  SplitMix64 rng(2);
  const auto p = random_probs(6, 2, rng);
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<int> t(6);
    for (int i = 0; i < 6; ++i) t[i] = (mask >> i) & 1;
    EXPECT_NEAR(lovasz_softmax_loss(p, 2, t), oracle::lovasz_softmax(p, 2, t), 1e-6) << "mask " << mask;
  }
}

TEST(Lovasz, RandomMulticlassMatchesOracleAndRange) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_probs(40, 5, rng);
    std::vector<int> t(40);
    for (auto& x : t) x = int(rng.next() % 5);
    const double l = lovasz_softmax_loss(p, 5, t);
    EXPECT_NEAR(l, oracle::lovasz_softmax(p, 5, t), 1e-9);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
  }
}

TEST(Lovasz, EmptyThrows) {
  EXPECT_THROW(lovasz_softmax_loss(std::vector<double>{}, 2, std::vector<int>{}), UndefinedMetricError);
}

TEST(DepthLoss, PerfectWithUnitConfidenceIsZero) {
  DepthMap m(4, 4);
  for (std::size_t i = 0; i < m.size(); ++i) m.depth[i] = float(i + 1);
  const std::vector<DepthMap> a{m};
  const auto l = depth_uncertainty_loss(a, a, 0.5);
  EXPECT_EQ(l.total(), 0.0);
}

TEST(DepthLoss, UncertaintyMinimizerMatchesClosedForm) {
  const double alpha = 0.5;
  for (double residual : {0.3, 1.0, 2.5}) {
    auto loss = [&](double sigma) {
      DepthMap p(1, 1), g(1, 1);
      p.depth[0] = float(10.0 + residual);
      g.depth[0] = 10.0f;
      p.uncertainty[0] = float(sigma);
      return depth_uncertainty_loss(std::vector<DepthMap>{p}, std::vector<DepthMap>{g}, alpha).total();
    };
    const double found = oracle::golden_section(loss, 1e-3, 10.0);
    const double r = double(float(10.0 + residual)) - 10.0;
    EXPECT_NEAR(found, alpha / r, 1e-3);
  }
}

TEST(DepthLoss, MatchesScalarLoopWithSentinels) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DepthMap> p, g;
    for (int v = 0; v < 2; ++v) {
      DepthMap a(4, 4), b(4, 4);
      for (std::size_t i = 0; i < 16; ++i) {
        a.depth[i] = float(rng.uniform(1, 20));
        b.depth[i] = rng.uniform() < 0.2 ? DepthMap::kNoReturn : float(rng.uniform(1, 20));
        a.uncertainty[i] = float(rng.uniform(0.1, 2));
      }
      p.push_back(a);
      g.push_back(b);
    }
    const auto got = depth_uncertainty_loss(p, g, 0.5);
    const auto want = depth_oracle(p, g, 0.5);
    EXPECT_NEAR(got.depth_term, want.depth_term, 1e-7);
    EXPECT_NEAR(got.gradient_term, want.gradient_term, 1e-7);
    EXPECT_NEAR(got.uncertainty_term, want.uncertainty_term, 1e-7);
  }
}

TEST(DepthLoss, NonIncreasingTowardTruth) {
  SplitMix64 rng(5);
  DepthMap g(6, 6), start(6, 6);
  for (std::size_t i = 0; i < 36; ++i) {
    g.depth[i] = float(rng.uniform(2, 10));
    start.depth[i] = float(rng.uniform(2, 10));
    start.uncertainty[i] = float(rng.uniform(0.5, 1.5));
  }
  double prev = 1e300;
  for (int step = 0; step <= 10; ++step) {
    DepthMap p = start;
    const double t = step / 10.0;
    for (std::size_t i = 0; i < 36; ++i) p.depth[i] = float((1 - t) * start.depth[i] + t * g.depth[i]);
    const double l = depth_uncertainty_loss(std::vector<DepthMap>{p}, std::vector<DepthMap>{g}, 0.5).total();
    EXPECT_LE(l, prev + 1e-9);
    prev = l;
  }
}

TEST(DepthLoss, NonPositiveUncertaintyThrows) {
  DepthMap p(1, 2), g(1, 2);
  p.uncertainty[1] = 0.0f;
  EXPECT_THROW(depth_uncertainty_loss(std::vector<DepthMap>{p}, std::vector<DepthMap>{g}, 0.5), DomainError);
}

TEST(LossReport, TotalIdentity) {
  const DepthLossBreakdown d{0.3, 0.2, -0.7};
  const LossWeights w{1.3, 0.05, 0.5};
  const auto r = make_loss_report(0.9, 0.4, d, w);
  EXPECT_NEAR(r.total, 1.3 * (0.9 + 0.4) + 0.05 * (0.3 + 0.2 - 0.7), 1e-9);
  EXPECT_EQ(r.weights.occ, 1.3);
}
