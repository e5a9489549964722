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

#include <cstddef>
#include <span>
#include <vector>

#include "gaussocc/core.hpp"

namespace gaussocc {

// Probabilities are row-major, one row of `channels` entries per voxel;
// targets hold the expected channel per voxel.

// Mean over non-ignored voxels of -log(p[target]), with p clamped to
// [1e-7, 1]. Throws UndefinedMetricError when every voxel is ignored.
double cross_entropy_loss(std::span<const double> probs, std::size_t channels,
                          std::span<const int> targets, int ignore_index = -1);

// Lovasz-Softmax averaged over the channels present in the targets.
// Throws UndefinedMetricError on an empty (or fully ignored) grid.
double lovasz_softmax_loss(std::span<const double> probs, std::size_t channels,
                           std::span<const int> targets, int ignore_index = -1);

// Gradient of the Lovasz extension of the Jaccard loss for foreground flags
// already sorted by decreasing error.
std::vector<double> lovasz_grad(std::span<const int> sorted_foreground);

struct DepthLossBreakdown {
  double depth_term = 0.0;
  double gradient_term = 0.0;
  double uncertainty_term = 0.0;

  double total() const { return depth_term + gradient_term + uncertainty_term; }
};

// Sum over views of
//   ||sigma * (D_hat - D)|| + ||sigma * (grad D_hat - grad D)|| - alpha * log sigma
// where ||.|| is the root-mean-square over valid pixels (valid gradient
// entries for the second norm), grad is the forward difference along rows and
// columns, and the log term is the mean over valid pixels. Pixels with a
// no-return depth in either map are excluded everywhere. Ground-truth
// uncertainty is ignored.
DepthLossBreakdown depth_uncertainty_loss(std::span<const DepthMap> pred, std::span<const DepthMap> gt,
                                          double alpha_unc);

struct LossWeights {
  double occ = 1.0;
  double depth = 0.05;
  double alpha_unc = 0.5;
};

struct LossReport {
  double total = 0.0;
  double occ_ce = 0.0;
  double occ_lovasz = 0.0;
  double depth_term = 0.0;
  double gradient_term = 0.0;
  double uncertainty_term = 0.0;
  LossWeights weights;
};

LossReport make_loss_report(double occ_ce, double occ_lovasz, const DepthLossBreakdown& depth,
                            const LossWeights& weights);

}  // namespace gaussocc
