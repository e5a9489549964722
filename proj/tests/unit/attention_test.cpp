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

#include <cmath>
#include <filesystem>

#include "gaussocc/attention.hpp"
#include "gaussocc/errors.hpp"
#include "gaussocc/random.hpp"

using namespace gaussocc;
using namespace gaussocc::attention;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, SplitMix64& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

TokenSet random_tokens(int views, Eigen::Index k, Eigen::Index c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  TokenSet t;
  t.num_registers = 2;
  for (int v = 0; v < views; ++v) t.views.push_back(random_matrix(k, c, rng));
  return t;
}

// softmax(q k^T / sqrt(d)) v with plain loops.
Matrix loop_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(k.rows()));
    double mx = -1e300;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      double d = 0;
      for (Eigen::Index c = 0; c < q.cols(); ++c) d += q(i, c) * k(j, c);
      s[j] = d / std::sqrt(double(q.cols()));
      mx = std::max(mx, s[j]);
    }
    double z = 0;
    for (auto& x : s) z += x = std::exp(x - mx);
    for (Eigen::Index j = 0; j < k.rows(); ++j)
      for (Eigen::Index c = 0; c < v.cols(); ++c) out(i, c) += s[j] / z * v(j, c);
  }
  return out;
}

}  // namespace

TEST(ScaledDotAttention, SingleKeyReturnsValueRow) {
  SplitMix64 rng(1);
  const Matrix q = random_matrix(4, 3, rng), k = random_matrix(1, 3, rng), v = random_matrix(1, 3, rng);
  const Matrix out = scaled_dot_attention(q, k, v);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(out.row(i), v.row(0));
}

TEST(ScaledDotAttention, IdenticalKeysGiveValueMean) {
  SplitMix64 rng(2);
  const Matrix q = random_matrix(3, 2, rng), v = random_matrix(5, 2, rng);
  Matrix k(5, 2);
  for (int i = 0; i < 5; ++i) k.row(i) << 0.3, -1.1;
  const Matrix out = scaled_dot_attention(q, k, v);
  const Eigen::RowVectorXd mean = v.colwise().mean();
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE((out.row(i) - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ScaledDotAttention, MatchesScalarLoopOnIntegerInputs) {
  Matrix q(2, 2), k(3, 2), v(3, 2);
  q << 1, 0, 2, -1;
  k << 1, 1, 0, 2, -1, 1;
  v << 1, 2, 3, 4, 5, 6;
  const Matrix out = scaled_dot_attention(q, k, v);
  EXPECT_LE((out - loop_attention(q, k, v)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ScaledDotAttention, MatchesScalarLoopRandom) {
  SplitMix64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix q = random_matrix(7, 4, rng), k = random_matrix(9, 4, rng), v = random_matrix(9, 4, rng);
    EXPECT_LE((scaled_dot_attention(q, k, v) - loop_attention(q, k, v)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ScaledDotAttention, ShapeMismatchThrows) {
  SplitMix64 rng(4);
  EXPECT_THROW(scaled_dot_attention(random_matrix(2, 3, rng), random_matrix(2, 4, rng), random_matrix(2, 3, rng)),
               ShapeError);
  EXPECT_THROW(scaled_dot_attention(random_matrix(2, 3, rng), random_matrix(2, 3, rng), random_matrix(3, 3, rng)),
               ShapeError);
}

TEST(AttentionProbabilities, RowsAreDistributions) {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Matrix p = attention_probabilities(random_matrix(6, 3, rng) * 10.0, random_matrix(8, 3, rng) * 10.0);
    EXPECT_GE(p.minCoeff(), 0.0);
    for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
  }
}

TEST(AlternatingBlock, SingleViewInFrameMatchesDirectCall) {
  const TokenSet t = random_tokens(1, 6, 4, 7);
  const auto w = AttentionWeights::random(4, 4, 8);
  const auto stage1 = in_frame_pass(t, w.in_frame);
  const Matrix& x = t.views[0];
  const Matrix direct = scaled_dot_attention(project(x, w.in_frame.query), project(x, w.in_frame.key),
                                             project(x, w.in_frame.value));
  EXPECT_EQ(stage1[0], direct);
}

TEST(AlternatingBlock, OutputShapeMatchesInput) {
  const TokenSet t = random_tokens(3, 5, 4, 9);
  const TokenSet out = alternating_block(t, AttentionWeights::random(4, 4, 10));
  ASSERT_EQ(out.views.size(), 3u);
  EXPECT_EQ(out.num_registers, t.num_registers);
  for (const auto& v : out.views) {
    EXPECT_EQ(v.rows(), 5);
    EXPECT_EQ(v.cols(), 4);
  }
}

TEST(AlternatingBlock, CrossFramePermutationEquivariantExactly) {
  const auto w = AttentionWeights::random(4, 4, 12);
  const TokenSet t = random_tokens(4, 5, 4, 11);
  TokenSet p = t;
  const std::vector<int> perm{2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) p.views[i] = t.views[perm[i]];
  const auto a = alternating_block(t, w), b = alternating_block(p, w);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(b.views[i], a.views[perm[i]]);
}

TEST(AlternatingBlock, InFrameStageIsViewLocal) {
  const auto w = AttentionWeights::random(4, 4, 13);
  const TokenSet t = random_tokens(3, 5, 4, 14);
  TokenSet u = t;
  u.views[1](2, 3) += 0.75;
  const auto a = in_frame_pass(t, w.in_frame), b = in_frame_pass(u, w.in_frame);
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(a[2], b[2]);
  EXPECT_NE(a[1], b[1]);
}

TEST(AlternatingBlock, CrossFrameMixesViews) {
  const auto w = AttentionWeights::random(4, 4, 15);
  const TokenSet t = random_tokens(2, 5, 4, 16);
  TokenSet u = t;
  u.views[1](0, 0) += 1.0;
  EXPECT_NE(alternating_block(t, w).views[0], alternating_block(u, w).views[0]);
}

TEST(AlternatingBlock, InconsistentViewsThrow) {
  TokenSet t = random_tokens(2, 5, 4, 17);
  t.views[1] = Matrix::Zero(4, 4);
  EXPECT_THROW(alternating_block(t, AttentionWeights::random(4, 4, 1)), ShapeError);
  EXPECT_THROW(alternating_block(TokenSet{}, AttentionWeights::random(4, 4, 1)), ShapeError);
  EXPECT_THROW(alternating_block(random_tokens(2, 5, 4, 1), AttentionWeights::random(4, 3, 1)), ShapeError);
}

TEST(AttentionWeights, DeterministicAndRoundTrips) {
  const auto a = AttentionWeights::random(4, 3, 21), b = AttentionWeights::random(4, 3, 21);
  EXPECT_EQ(a.in_frame.query, b.in_frame.query);
  EXPECT_EQ(a.cross_frame.value, b.cross_frame.value);
  const auto dir = std::filesystem::temp_directory_path() / "gaussocc_attention_test";
  std::filesystem::create_directories(dir);
  save_weights(a, dir / "w");
  const auto c = load_weights(dir / "w");
  // Stored as float32.
  EXPECT_EQ(c.in_frame.key, a.in_frame.key.cast<float>().cast<double>());
  EXPECT_EQ(c.cross_frame.query, a.cross_frame.query.cast<float>().cast<double>());
  std::filesystem::remove_all(dir);
}
