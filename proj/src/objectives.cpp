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

#include "gaussocc/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gaussocc/errors.hpp"

namespace gaussocc {
namespace {

void check_rows(std::span<const double> probs, std::size_t channels, std::span<const int> targets) {
  if (channels == 0) throw ShapeError("probability rows need at least one channel");
  if (probs.size() != targets.size() * channels) {
    throw ShapeError(std::to_string(probs.size()) + " probabilities for " + std::to_string(targets.size()) +
                     " voxels of " + std::to_string(channels) + " channels");
  }
}

}  // namespace

double cross_entropy_loss(std::span<const double> probs, std::size_t channels, std::span<const int> targets,
                          int ignore_index) {
  check_rows(probs, channels, targets);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = targets[i];
    if (t == ignore_index) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= channels) throw DomainError("target channel out of range");
    const auto row = probs.subspan(i * channels, channels);
    const double row_sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(row_sum - 1.0) > 1e-4) throw DomainError("probability row does not sum to 1");
    sum += -std::log(std::clamp(row[static_cast<std::size_t>(t)], 1e-7, 1.0));
    ++count;
  }
  if (count == 0) throw UndefinedMetricError("cross-entropy over zero voxels");
  return sum / static_cast<double>(count);
}

std::vector<double> lovasz_grad(std::span<const int> sorted_foreground) {
  const std::size_t n = sorted_foreground.size();
  std::vector<double> grad(n);
  const double gts = std::accumulate(sorted_foreground.begin(), sorted_foreground.end(), 0.0);
  double cum_fg = 0.0, cum_bg = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum_fg += sorted_foreground[i];
    cum_bg += 1 - sorted_foreground[i];
    const double jaccard = 1.0 - (gts - cum_fg) / (gts + cum_bg);
    grad[i] = jaccard - prev;
    prev = jaccard;
  }
  return grad;
}

double lovasz_softmax_loss(std::span<const double> probs, std::size_t channels, std::span<const int> targets,
                           int ignore_index) {
  check_rows(probs, channels, targets);
  std::vector<std::size_t> voxels;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == ignore_index) continue;
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= channels) {
      throw DomainError("target channel out of range");
    }
    voxels.push_back(i);
  }
  if (voxels.empty()) throw UndefinedMetricError("Lovasz-Softmax over zero voxels");

  std::vector<bool> present(channels, false);
  for (auto i : voxels) present[static_cast<std::size_t>(targets[i])] = true;

  double total = 0.0;
  std::size_t n_present = 0;
  std::vector<double> errors(voxels.size());
  std::vector<std::size_t> order(voxels.size());
  std::vector<int> fg_sorted(voxels.size());
  for (std::size_t c = 0; c < channels; ++c) {
    if (!present[c]) continue;
    for (std::size_t k = 0; k < voxels.size(); ++k) {
      const double fg = targets[voxels[k]] == static_cast<int>(c) ? 1.0 : 0.0;
      errors[k] = std::abs(fg - probs[voxels[k] * channels + c]);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errors[a] > errors[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      fg_sorted[k] = targets[voxels[order[k]]] == static_cast<int>(c) ? 1 : 0;
    }
    const auto grad = lovasz_grad(fg_sorted);
    double loss = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) loss += errors[order[k]] * grad[k];
    total += loss;
    ++n_present;
  }
  return total / static_cast<double>(n_present);
}

DepthLossBreakdown depth_uncertainty_loss(std::span<const DepthMap> pred, std::span<const DepthMap> gt,
                                          double alpha_unc) {
  if (pred.size() != gt.size()) throw ShapeError("prediction and ground truth view counts differ");
  DepthLossBreakdown out;
  for (std::size_t v = 0; v < pred.size(); ++v) {
    const DepthMap& p = pred[v];
    const DepthMap& g = gt[v];
    if (p.height != g.height || p.width != g.width || p.depth.size() != p.size() ||
        g.depth.size() != g.size() || p.uncertainty.size() != p.size()) {
      throw ShapeError("depth map shapes differ in view " + std::to_string(v));
    }
    for (float s : p.uncertainty) {
      if (!(s > 0.0f)) throw DomainError("predicted depth uncertainty must be positive");
    }
    auto valid = [&](std::size_t i) { return p.valid(i) && g.valid(i); };

    double sq = 0.0, log_sum = 0.0, grad_sq = 0.0;
    std::size_t n = 0, n_grad = 0;
    for (std::uint32_t r = 0; r < p.height; ++r) {
      for (std::uint32_t c = 0; c < p.width; ++c) {
        const std::size_t i = p.index(r, c);
        if (!valid(i)) continue;
        const double sigma = p.uncertainty[i];
        const double res = static_cast<double>(p.depth[i]) - g.depth[i];
        sq += (sigma * res) * (sigma * res);
        log_sum += std::log(sigma);
        ++n;
        auto grad_residual = [&](std::size_t j) {
          const double dp = static_cast<double>(p.depth[j]) - p.depth[i];
          const double dg = static_cast<double>(g.depth[j]) - g.depth[i];
          const double e = sigma * (dp - dg);
          grad_sq += e * e;
          ++n_grad;
        };
        if (c + 1 < p.width && valid(i + 1)) grad_residual(i + 1);
        if (r + 1 < p.height && valid(i + p.width)) grad_residual(i + p.width);
      }
    }
    if (n > 0) {
      out.depth_term += std::sqrt(sq / static_cast<double>(n));
      out.uncertainty_term += -alpha_unc * log_sum / static_cast<double>(n);
    }
    if (n_grad > 0) out.gradient_term += std::sqrt(grad_sq / static_cast<double>(n_grad));
  }
  return out;
}

LossReport make_loss_report(double occ_ce, double occ_lovasz, const DepthLossBreakdown& depth,
                            const LossWeights& weights) {
  LossReport r;
  r.occ_ce = occ_ce;
  r.occ_lovasz = occ_lovasz;
  r.depth_term = depth.depth_term;
  r.gradient_term = depth.gradient_term;
  r.uncertainty_term = depth.uncertainty_term;
  r.weights = weights;
  r.total = weights.occ * (occ_ce + occ_lovasz) + weights.depth * (depth.depth_term + depth.gradient_term + depth.uncertainty_term);
  return r;
}

}  // namespace gaussocc
