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
#include <cstdint>
#include <filesystem>
#include <vector>

namespace gaussocc::attention {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-view token matrices, each (K + R) x C_tok, with the R register tokens
// occupying the last rows of every view.
struct TokenSet {
  std::vector<Matrix> views;
  std::uint32_t num_registers = 0;

  Eigen::Index tokens_per_view() const { return views.empty() ? 0 : views.front().rows(); }
  Eigen::Index channels() const { return views.empty() ? 0 : views.front().cols(); }
  void validate() const;
};

// Query/key/value projections of one attention stage, each C_tok x d_k.
struct ProjectionWeights {
  Matrix query;
  Matrix key;
  Matrix value;

  Eigen::Index inner_dim() const { return query.cols(); }
  void validate() const;
};

struct AttentionWeights {
  ProjectionWeights in_frame;
  ProjectionWeights cross_frame;

  // Deterministic weights with entries uniform in +-1/sqrt(c_tok).
  static AttentionWeights random(Eigen::Index c_tok, Eigen::Index d_k, std::uint64_t seed);
};

// T W with a fixed-order inner loop, so each output row depends only on the
// matching input row.
Matrix project(const Matrix& tokens, const Matrix& weights);

// softmax(Q K^T / sqrt(d_k)), one row per query.
Matrix attention_probabilities(const Matrix& q, const Matrix& k);

// softmax(Q K^T / sqrt(d_k)) V. Keys are accumulated in a canonical
// lexicographic order of their (key, value) rows, so the result is exactly
// invariant to permutations of the key/value rows.
Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v);

// Per-view self-attention; view i's output depends on view i only.
std::vector<Matrix> in_frame_pass(const TokenSet& tokens, const ProjectionWeights& weights);

// Self-attention over the row-concatenation of all views, split back per view.
std::vector<Matrix> cross_frame_pass(const std::vector<Matrix>& views, const ProjectionWeights& weights);

// One in-frame pass per view followed by one cross-frame pass over all views.
// Both stages must map C_tok back to C_tok (d_k == C_tok).
TokenSet alternating_block(const TokenSet& tokens, const AttentionWeights& weights);

// Fixture format: `<stem>.bin` holds the six matrices as row-major float32,
// `<stem>.json` gives their labels, shapes and float offsets.
void save_weights(const AttentionWeights& weights, const std::filesystem::path& stem);
AttentionWeights load_weights(const std::filesystem::path& stem);

}  // namespace gaussocc::attention
