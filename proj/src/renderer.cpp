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

#include "gaussocc/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaussocc/errors.hpp"
#include "gaussocc/parallel.hpp"

namespace gaussocc {
namespace {

constexpr double kCutoffSq = kKernelCutoff * kKernelCutoff;
constexpr std::uint32_t kTile = 4;

}  // namespace

std::vector<double> softmax(std::span<const float> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(static_cast<double>(logits[c]) - mx);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  return p;
}

PreparedGaussian prepare(const GaussianPrimitive& g) {
  PreparedGaussian p;
  const Mat3 sigma = covariance_of(g.scale_d(), g.quaternion());  // validates the rotation
  const Quaternion q = g.quaternion().normalized();
  const Vec3 s = g.scale_d().cwiseMax(kScaleFloor);
  p.mean = g.mean_d();
  p.rotation_t = q.to_matrix().transpose();
  p.inv_scale = s.cwiseInverse();
  // Padding keeps the bound conservative against rounding in mahalanobis_sq.
  for (int k = 0; k < 3; ++k) p.half_extent[k] = kKernelCutoff * std::sqrt(sigma(k, k)) * (1.0 + 1e-9) + 1e-12;
  p.opacity = g.opacity;
  p.density_norm = 1.0 / (std::pow(2.0 * std::numbers::pi, 1.5) * s.prod());
  p.class_probs = softmax(g.semantics);
  return p;
}

std::vector<PreparedGaussian> prepare_all(const GaussianSet& gs) {
  std::vector<PreparedGaussian> out(gs.size());
  const auto n = static_cast<std::ptrdiff_t>(gs.size());
  parallel::ExceptionTrap trap;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    trap.guard([&] { out[static_cast<std::size_t>(i)] = prepare(gs.primitives[static_cast<std::size_t>(i)]); });
  }
  trap.rethrow();
  return out;
}

double kernel_phi(const Vec3& x, const PreparedGaussian& g) {
  const double m2 = g.mahalanobis_sq(x);
  return m2 > kCutoffSq ? 0.0 : std::exp(-0.5 * m2);
}

double kernel_phi(const Vec3& x, const GaussianPrimitive& g) { return kernel_phi(x, prepare(g)); }

void PointAccumulator::add(const PreparedGaussian& g) {
  const double m2 = g.mahalanobis_sq(x_);
  if (m2 > kCutoffSq) return;
  const double phi = std::exp(-0.5 * m2);
  log_keep_.add(std::log1p(-g.opacity * phi));
  const double w = phi * g.density_norm * g.opacity;
  if (w > 0.0) {
    denom_.add(w);
    for (std::size_t c = 0; c < numer_.size(); ++c) numer_[c].add(w * g.class_probs[c]);
  }
}

double PointAccumulator::alpha() const {
  return std::clamp(-std::expm1(log_keep_.value()), 0.0, 1.0);
}

std::vector<double> PointAccumulator::semantics() const {
  const std::size_t n = numer_.size();
  std::vector<double> e(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  const double d = denom_.value();
  if (d > 0.0) {
    for (std::size_t c = 0; c < n; ++c) e[c] = numer_[c].value() / d;
  }
  return e;
}

void PointAccumulator::write_occupancy(std::span<float> out) const {
  const double a = alpha();
  out[0] = static_cast<float>(1.0 - a);
  const auto e = semantics();
  for (std::size_t c = 0; c < e.size(); ++c) out[c + 1] = static_cast<float>(a * e[c]);
}

double occupancy_alpha(const Vec3& x, const GaussianSet& gs) {
  PointAccumulator acc(x, gs.num_classes);
  for (const auto& g : gs.primitives) acc.add(prepare(g));
  return acc.alpha();
}

SemanticEstimate expected_semantics(const Vec3& x, const GaussianSet& gs) {
  PointAccumulator acc(x, gs.num_classes);
  for (const auto& g : gs.primitives) acc.add(prepare(g));
  return {acc.semantics(), !acc.has_semantics()};
}

std::uint8_t label_from_occupancy(std::span<const float> o, std::uint32_t num_classes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < o.size(); ++c) {
    if (o[c] > o[best]) best = c;
  }
  return best == 0 ? static_cast<std::uint8_t>(num_classes) : static_cast<std::uint8_t>(best - 1);
}

VoxelRange voxel_range(const PreparedGaussian& g, const GridGeometry& target) {
  VoxelRange r{};
  for (int k = 0; k < 3; ++k) {
    // Centers sit at origin + (i + 0.5) * voxel_size.
    const double lo = (g.mean[k] - g.half_extent[k] - target.origin[k]) / target.voxel_size - 0.5;
    const double hi = (g.mean[k] + g.half_extent[k] - target.origin[k]) / target.voxel_size - 0.5;
    const double dim = static_cast<double>(target.dims[k]);
    r.lo[k] = static_cast<std::int64_t>(std::clamp(std::ceil(lo), 0.0, dim));
    r.hi[k] = static_cast<std::int64_t>(std::clamp(std::floor(hi), -1.0, dim - 1.0));
  }
  return r;
}

SemanticOccupancyField render_grid(const GaussianSet& gs, const GridGeometry& target) {
  target.validate();
  const auto num_classes = static_cast<std::uint32_t>(gs.num_classes);
  SemanticOccupancyField field;
  field.geometry = target;
  field.num_classes = num_classes;
  field.probs.assign(target.num_voxels() * field.channels(), 0.0f);
  field.labels = OccupancyGrid(target, num_classes);

  const auto prepared = prepare_all(gs);
  std::vector<VoxelRange> ranges(prepared.size());
  const auto np = static_cast<std::ptrdiff_t>(prepared.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    ranges[static_cast<std::size_t>(i)] = voxel_range(prepared[static_cast<std::size_t>(i)], target);
  }

  // Tile lists in CSR form, each list in ascending Gaussian index.
  const std::array<std::uint32_t, 3> tiles{(target.dims[0] + kTile - 1) / kTile,
                                           (target.dims[1] + kTile - 1) / kTile,
                                           (target.dims[2] + kTile - 1) / kTile};
  const std::size_t n_tiles = std::size_t{tiles[0]} * tiles[1] * tiles[2];
  auto tile_index = [&](std::int64_t tx, std::int64_t ty, std::int64_t tz) {
    return (static_cast<std::size_t>(tx) * tiles[1] + static_cast<std::size_t>(ty)) * tiles[2] +
           static_cast<std::size_t>(tz);
  };
  auto for_each_tile = [&](const VoxelRange& r, auto&& fn) {
    for (std::int64_t tx = r.lo[0] / kTile; tx <= r.hi[0] / kTile; ++tx)
      for (std::int64_t ty = r.lo[1] / kTile; ty <= r.hi[1] / kTile; ++ty)
        for (std::int64_t tz = r.lo[2] / kTile; tz <= r.hi[2] / kTile; ++tz) fn(tile_index(tx, ty, tz));
  };
  std::vector<std::size_t> offsets(n_tiles + 1, 0);
  for (const auto& r : ranges) {
    if (!r.empty()) for_each_tile(r, [&](std::size_t t) { ++offsets[t + 1]; });
  }
  for (std::size_t t = 0; t < n_tiles; ++t) offsets[t + 1] += offsets[t];
  std::vector<std::uint32_t> members(offsets.back());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (!ranges[i].empty()) for_each_tile(ranges[i], [&](std::size_t t) { members[cursor[t]++] = static_cast<std::uint32_t>(i); });
    }
  }

  const auto nt = static_cast<std::ptrdiff_t>(n_tiles);
  const std::size_t channels = field.channels();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const std::uint32_t tz = static_cast<std::uint32_t>(ut % tiles[2]);
    const std::uint32_t ty = static_cast<std::uint32_t>((ut / tiles[2]) % tiles[1]);
    const std::uint32_t tx = static_cast<std::uint32_t>(ut / (std::size_t{tiles[2]} * tiles[1]));
    const std::span<const std::uint32_t> list(members.data() + offsets[ut], offsets[ut + 1] - offsets[ut]);
    for (std::uint32_t x = tx * kTile; x < std::min(target.dims[0], (tx + 1) * kTile); ++x) {
      for (std::uint32_t y = ty * kTile; y < std::min(target.dims[1], (ty + 1) * kTile); ++y) {
        for (std::uint32_t z = tz * kTile; z < std::min(target.dims[2], (tz + 1) * kTile); ++z) {
          const std::size_t v = target.index(x, y, z);
          PointAccumulator acc(target.center(x, y, z), num_classes);
          for (const std::uint32_t i : list) {
            if (ranges[i].contains(x, y, z)) acc.add(prepared[i]);
          }
          const std::span<float> out(field.probs.data() + v * channels, channels);
          acc.write_occupancy(out);
          field.labels.labels[v] = label_from_occupancy(out, num_classes);
        }
      }
    }
  }
  return field;
}

}  // namespace gaussocc
