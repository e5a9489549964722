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
// Independent reference computations used as test oracles. None of these
// call into the library's numeric kernels.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "gaussocc/core.hpp"
#include "gaussocc/synth.hpp"

namespace oracle {

using gaussocc::Mat3;
using gaussocc::Vec3;

// Rotation via axis-angle and Rodrigues' formula.
inline Mat3 rotation(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  const double vn = std::sqrt(x * x + y * y + z * z);
  if (vn < 1e-300) return Mat3::Identity();
  const double theta = 2.0 * std::atan2(vn, w);
  Mat3 k;
  k << 0, -z / vn, y / vn, z / vn, 0, -x / vn, -y / vn, x / vn, 0;
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

inline Mat3 covariance(const Vec3& s, const std::array<float, 4>& q) {
  const Mat3 r = rotation(q[0], q[1], q[2], q[3]);
  Mat3 d = Mat3::Zero();
  for (int k = 0; k < 3; ++k) d(k, k) = std::max(s[k], 1e-3) * std::max(s[k], 1e-3);
  return r * d * r.transpose();
}

inline double phi(const Vec3& x, const gaussocc::GaussianPrimitive& g) {
  const Mat3 inv = covariance(g.scale_d(), g.rotation).inverse();
  const Vec3 d = x - g.mean_d();
  const double m2 = d.dot(inv * d);
  if (m2 > 9.0) return 0.0;
  return std::exp(-0.5 * m2);
}

inline double density(const Vec3& x, const gaussocc::GaussianPrimitive& g) {
  const Mat3 c = covariance(g.scale_d(), g.rotation);
  return phi(x, g) / (std::pow(2.0 * std::numbers::pi, 1.5) * std::sqrt(c.determinant()));
}

inline std::vector<double> softmax(const std::vector<float>& l) {
  double m = -std::numeric_limits<double>::infinity();
  for (float v : l) m = std::max(m, double(v));
  std::vector<double> p(l.size());
  double s = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) s += p[i] = std::exp(double(l[i]) - m);
  for (double& v : p) v /= s;
  return p;
}

// [1 - alpha; alpha * e] by direct product and weighted sums.
inline std::vector<double> occupancy(const Vec3& x, const gaussocc::GaussianSet& gs) {
  const std::size_t c = gs.num_classes;
  double keep = 1.0, denom = 0.0;
  std::vector<double> numer(c, 0.0);
  for (const auto& g : gs.primitives) {
    const double f = phi(x, g);
    if (f == 0.0) continue;
    keep *= 1.0 - g.opacity * f;
    const double w = density(x, g) * g.opacity;
    denom += w;
    const auto p = softmax(g.semantics);
    for (std::size_t k = 0; k < c; ++k) numer[k] += w * p[k];
  }
  const double alpha = 1.0 - keep;
  std::vector<double> o(c + 1);
  o[0] = 1.0 - alpha;
  for (std::size_t k = 0; k < c; ++k) o[k + 1] = alpha * (denom > 0.0 ? numer[k] / denom : 1.0 / double(c));
  return o;
}

// Lovasz extension by explicit Jaccard differences over sorted prefixes.
inline double lovasz_class(const std::vector<double>& err, const std::vector<int>& fg) {
  std::vector<std::size_t> order(err.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return err[a] > err[b]; });
  double gts = 0;
  for (int f : fg) gts += f;
  auto jaccard_loss = [&](std::size_t k) {
    if (k == 0) return 0.0;
    double inter = gts, uni = gts;
    for (std::size_t i = 0; i < k; ++i) {
      if (fg[order[i]]) inter -= 1;
      else uni += 1;
    }
    return 1.0 - inter / uni;
  };
  double loss = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) loss += err[order[k - 1]] * (jaccard_loss(k) - jaccard_loss(k - 1));
  return loss;
}

// Mean of lovasz_class over the classes present in t; p is row-major n x c.
inline double lovasz_softmax(const std::vector<double>& p, std::size_t c, const std::vector<int>& t) {
  double sum = 0;
  int present = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<int> fg(t.size());
    std::vector<double> err(t.size());
    bool any = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
      fg[i] = t[i] == int(k);
      any |= fg[i] != 0;
      err[i] = std::abs(fg[i] - p[i * c + k]);
    }
    if (!any) continue;
    sum += lovasz_class(err, fg);
    ++present;
  }
  return sum / present;
}

using Cell = std::tuple<long long, long long, long long>;

// Distinct sampling cells by direct floor arithmetic.
inline std::map<Cell, std::vector<std::size_t>> group_cells(const gaussocc::GaussianSet& gs, const Vec3& lo,
                                                            const Vec3& hi, double s) {
  std::map<Cell, std::vector<std::size_t>> out;
  const long long lx = (long long)std::floor(lo.x() / s), ly = (long long)std::floor(lo.y() / s),
                  lz = (long long)std::floor(lo.z() / s);
  const long long hx = (long long)std::ceil(hi.x() / s), hy = (long long)std::ceil(hi.y() / s),
                  hz = (long long)std::ceil(hi.z() / s);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Vec3 m = gs.primitives[i].mean_d();
    if ((m.array() < lo.array()).any() || (m.array() >= hi.array()).any()) continue;
    const Cell c{(long long)std::floor(m.x() / s), (long long)std::floor(m.y() / s), (long long)std::floor(m.z() / s)};
    if (std::get<0>(c) < lx || std::get<0>(c) >= hx || std::get<1>(c) < ly || std::get<1>(c) >= hy ||
        std::get<2>(c) < lz || std::get<2>(c) >= hz) {
      continue;
    }
    out[c].push_back(i);
  }
  return out;
}

inline double nearest_occupied(const gaussocc::OccupancyGrid& g, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t x = 0; x < g.geometry.dims[0]; ++x)
    for (std::uint32_t y = 0; y < g.geometry.dims[1]; ++y)
      for (std::uint32_t z = 0; z < g.geometry.dims[2]; ++z) {
        const std::size_t i = (std::size_t(x) * g.geometry.dims[1] + y) * g.geometry.dims[2] + z;
        if (g.labels[i] >= g.num_classes) continue;
        const Vec3 c = g.geometry.origin + g.geometry.voxel_size * Vec3(x + 0.5, y + 0.5, z + 0.5);
        best = std::min(best, (c - p).norm());
      }
  return best;
}

// Entry distance of a ray into an axis-aligned box, nullopt when missed.
inline std::optional<double> slab(const Vec3& o, const Vec3& v, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (v[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double a = (lo[k] - o[k]) / v[k], b = (hi[k] - o[k]) / v[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (t0 > t1) return std::nullopt;
  return t0;
}

struct Hit {
  double distance;
  int label;
};

// First occupied voxel along a ray, by testing every occupied voxel's box.
inline std::optional<Hit> first_hit(const gaussocc::OccupancyGrid& g, const Vec3& o, const Vec3& v) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < g.labels.size(); ++i) {
    if (g.labels[i] >= g.num_classes) continue;
    const auto c = g.geometry.coord(i);
    const Vec3 lo = g.geometry.origin + g.geometry.voxel_size * Vec3(c[0], c[1], c[2]);
    const Vec3 hi = lo + Vec3::Constant(g.geometry.voxel_size);
    const auto t = slab(o, v, lo, hi);
    if (t && (!best || *t < best->distance)) best = Hit{*t, g.labels[i]};
  }
  return best;
}

// Ray against each box face and the ground plane separately. Coincident
// faces (within 1e-9 relative) resolve to the later box.
inline std::optional<Hit> scene_hit(const gaussocc::SceneSpec& s, const Vec3& o, const Vec3& v) {
  std::vector<Hit> hits;
  auto offer = [&](double t, int label) {
    if (t >= 0.0) hits.push_back(Hit{t, label});
  };
  if (s.has_ground && v.z() != 0.0) {
    const double t = (s.ground_z - o.z()) / v.z();
    const Vec3 p = o + t * v;
    if (p.x() >= s.extent_min.x() && p.x() < s.extent_max.x() && p.y() >= s.extent_min.y() &&
        p.y() < s.extent_max.y()) {
      offer(t, int(s.ground_class));
    }
  }
  for (const auto& b : s.boxes) {
    const Eigen::AngleAxisd yaw(b.yaw, Vec3::UnitZ());
    const Mat3 r = yaw.toRotationMatrix();
    for (int axis = 0; axis < 3; ++axis) {
      for (int sign : {-1, 1}) {
        const Vec3 n = r.col(axis) * sign;
        const Vec3 p0 = b.center + n * b.half_extents[axis];
        const double den = n.dot(v);
        if (den == 0.0) continue;
        const double t = n.dot(p0 - o) / den;
        const Vec3 local = r.transpose() * (o + t * v - b.center);
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
          if (k != axis && std::abs(local[k]) > b.half_extents[k] + 1e-9) inside = false;
        }
        if (inside) offer(t, int(b.class_id));
      }
    }
  }
  if (hits.empty()) return std::nullopt;
  double t_min = hits[0].distance;
  for (const auto& h : hits) t_min = std::min(t_min, h.distance);
  std::optional<Hit> best;
  for (const auto& h : hits) {
    if (h.distance <= t_min + 1e-9 * std::max(1.0, t_min)) best = h;
  }
  return best;
}

// Minimizes f on [a, b] by golden-section search.
template <class F>
double golden_section(F f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < iters; ++i) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
