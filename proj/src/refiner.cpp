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

#include "gaussocc/refiner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "gaussocc/errors.hpp"
#include "json.hpp"

namespace gaussocc {

OffsetBasis OffsetBasis::axis_aligned(double delta_max) {
  OffsetBasis b;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 e = Vec3::Zero();
    e[axis] = delta_max;
    b.rows.push_back(e);
    b.rows.push_back(-e);
  }
  return b;
}

bool OffsetBasis::is_axis_paired() const {
  for (const auto& r : rows) {
    int nonzero = 0;
    for (int k = 0; k < 3; ++k) nonzero += r[k] != 0.0 ? 1 : 0;
    if (nonzero != 1) return false;
    if (std::none_of(rows.begin(), rows.end(), [&](const Vec3& o) { return o == -r; })) return false;
  }
  return true;
}

double sigmoid(double w) {
  if (w >= 0.0) return 1.0 / (1.0 + std::exp(-w));
  const double e = std::exp(w);
  return e / (1.0 + e);
}

Vec3 basis_offset(std::span<const double> weights, const OffsetBasis& basis) {
  if (weights.size() != basis.size()) {
    throw ShapeError("weight vector has " + std::to_string(weights.size()) + " entries but the basis has " +
                     std::to_string(basis.size()) + " rows");
  }
  Vec3 d = Vec3::Zero();
  for (std::size_t k = 0; k < basis.size(); ++k) d += sigmoid(weights[k]) * basis.rows[k];
  return d;
}

GaussianSet refine_positions(const GaussianSet& gs, const OffsetBasis& basis, const WeightVectors& weights) {
  if (weights.size() != gs.size()) {
    throw ShapeError(std::to_string(weights.size()) + " weight vectors for " + std::to_string(gs.size()) +
                     " Gaussians");
  }
  for (const auto& w : weights) {
    if (w.size() != basis.size()) throw ShapeError("weight vector length does not match basis size");
  }
  GaussianSet out = gs;
  const auto n = static_cast<std::ptrdiff_t>(gs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& g = out.primitives[static_cast<std::size_t>(i)];
    g.mean = (g.mean_d() + basis_offset(weights[static_cast<std::size_t>(i)], basis)).cast<float>();
  }
  return out;
}

WeightProvider zero_weights(std::size_t basis_size) {
  return [basis_size](const GaussianSet& gs) {
    return WeightVectors(gs.size(), std::vector<double>(basis_size, 0.0));
  };
}

WeightProvider snap_weights(std::function<Vec3(const Vec3&)> nearest_surface, const OffsetBasis& basis) {
  if (!basis.is_axis_paired()) throw ConfigError("surface snapping needs an axis-paired basis");
  // For each axis: index of the positive row, the negative row and the reach.
  struct AxisPair {
    std::size_t pos = 0, neg = 0;
    double reach = 0.0;
    bool present = false;
  };
  std::array<AxisPair, 3> pairs{};
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const Vec3& r = basis.rows[k];
    for (int a = 0; a < 3; ++a) {
      if (r[a] > 0.0 && !pairs[a].present) {
        pairs[a].pos = k;
        pairs[a].reach = r[a];
        pairs[a].present = true;
        for (std::size_t j = 0; j < basis.size(); ++j) {
          if (basis.rows[j] == -r) pairs[a].neg = j;
        }
      }
    }
  }
  const std::size_t kb = basis.size();
  return [nearest = std::move(nearest_surface), pairs, kb](const GaussianSet& gs) {
    WeightVectors w(gs.size(), std::vector<double>(kb, 0.0));
    const auto n = static_cast<std::ptrdiff_t>(gs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Vec3 mu = gs.primitives[static_cast<std::size_t>(i)].mean_d();
      const Vec3 delta = nearest(mu) - mu;
      auto& wi = w[static_cast<std::size_t>(i)];
      for (int a = 0; a < 3; ++a) {
        if (!pairs[a].present) continue;
        // sigmoid(w+) - sigmoid(w-) = t with w+- = logit((1 +- t) / 2).
        const double t = std::clamp(delta[a] / pairs[a].reach, -1.0 + 1e-6, 1.0 - 1e-6);
        const double p = 0.5 * (1.0 + t), q = 0.5 * (1.0 - t);
        wi[pairs[a].pos] = std::log(p / (1.0 - p));
        wi[pairs[a].neg] = std::log(q / (1.0 - q));
      }
    }
    return w;
  };
}

OffsetBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open basis file " + path.string());
  const auto j = nlohmann::json::parse(in);
  OffsetBasis b;
  for (const auto& row : j.at("rows")) {
    if (row.size() != 3) throw FormatError("basis rows must have 3 entries");
    b.rows.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
  }
  if (b.rows.empty()) throw FormatError("basis has no rows");
  return b;
}

void save_basis(const OffsetBasis& basis, const std::filesystem::path& path) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : basis.rows) j["rows"].push_back({r.x(), r.y(), r.z()});
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed to write " + path.string());
}

}  // namespace gaussocc
