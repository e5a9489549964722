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

#include "gaussocc/distance_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaussocc/errors.hpp"

namespace gaussocc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One pass along `axis` over every line of the volume, in place.
void edt_pass(std::vector<double>& d, const std::array<std::uint32_t, 3>& dims, int axis) {
  const std::size_t n = dims[static_cast<std::size_t>(axis)];
  const std::size_t stride = axis == 2 ? 1 : axis == 1 ? dims[2] : std::size_t{dims[1]} * dims[2];
  // Lines are enumerated by the two remaining coordinates.
  const int a0 = axis == 0 ? 1 : 0;
  const int a1 = axis == 2 ? 1 : 2;
  const std::size_t n0 = dims[static_cast<std::size_t>(a0)], n1 = dims[static_cast<std::size_t>(a1)];
  auto linear = [&](std::size_t c0, std::size_t c1) {
    std::array<std::size_t, 3> c{};
    c[static_cast<std::size_t>(a0)] = c0;
    c[static_cast<std::size_t>(a1)] = c1;
    c[static_cast<std::size_t>(axis)] = 0;
    return (c[0] * dims[1] + c[1]) * dims[2] + c[2];
  };
  const auto lines = static_cast<std::ptrdiff_t>(n0 * n1);
#pragma omp parallel
  {
    std::vector<double> f(n), out(n), z(n + 1);
    std::vector<int> v(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t l = 0; l < lines; ++l) {
      const std::size_t base = linear(static_cast<std::size_t>(l) / n1, static_cast<std::size_t>(l) % n1);
      for (std::size_t i = 0; i < n; ++i) f[i] = d[base + i * stride];
      lower_envelope_1d(f, out, v, z);
      for (std::size_t i = 0; i < n; ++i) d[base + i * stride] = out[i];
    }
  }
}

}  // namespace

void lower_envelope_1d(std::span<const double> f_span, std::span<double> out_span, std::span<int> v_span,
                       std::span<double> z_span) {
  const int n = static_cast<int>(f_span.size());
  const double* f = f_span.data();
  double* out = out_span.data();
  int* v = v_span.data();     // parabola vertices in the envelope
  double* z = z_span.data();  // boundaries between consecutive parabolas
  auto intersect = [&](int q, int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };

  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (k >= 0 && intersect(q, v[k]) <= z[k]) --k;
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : intersect(q, v[k - 1]);
  }
  if (k < 0) {
    std::fill(out_span.begin(), out_span.end(), kInf);
    return;
  }
  z[k + 1] = kInf;
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    out[q] = double(q - v[j]) * (q - v[j]) + f[v[j]];
  }
}

std::vector<double> squared_edt(std::span<const std::uint8_t> is_site, const std::array<std::uint32_t, 3>& dims) {
  const std::size_t total = std::size_t{dims[0]} * dims[1] * dims[2];
  if (is_site.size() != total) throw ShapeError("site mask does not match dims");
  std::vector<double> d(total);
  for (std::size_t i = 0; i < total; ++i) d[i] = is_site[i] ? 0.0 : kInf;
  edt_pass(d, dims, 2);
  edt_pass(d, dims, 1);
  edt_pass(d, dims, 0);
  return d;
}

NearestOccupiedCenter::NearestOccupiedCenter(const OccupancyGrid& grid) : geom_(grid.geometry) {
  grid.validate();
  const std::size_t total = geom_.num_voxels();
  std::vector<std::uint8_t> sites(total);
  bool any = false;
  for (std::size_t i = 0; i < total; ++i) {
    sites[i] = grid.occupied(i) ? 1 : 0;
    any = any || sites[i];
  }
  if (!any) throw UndefinedMetricError("ground truth grid has no occupied voxel");
  edt_sq_ = squared_edt(sites, geom_.dims);

  const auto [nx, ny, nz] = geom_.dims;
  left_.assign(total, -1);
  right_.assign(total, -1);
  const auto lines = static_cast<std::ptrdiff_t>(std::size_t{ny} * nz);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 0; l < lines; ++l) {
    const auto y = static_cast<std::uint32_t>(static_cast<std::size_t>(l) / nz);
    const auto z = static_cast<std::uint32_t>(static_cast<std::size_t>(l) % nz);
    const std::size_t row = static_cast<std::size_t>(l) * nx;
    std::int32_t last = -1;
    for (std::uint32_t x = 0; x < nx; ++x) {
      if (sites[geom_.index(x, y, z)]) last = static_cast<std::int32_t>(x);
      left_[row + x] = last;
    }
    last = -1;
    for (std::uint32_t x = nx; x-- > 0;) {
      if (sites[geom_.index(x, y, z)]) last = static_cast<std::int32_t>(x);
      right_[row + x] = last;
    }
  }
}

double NearestOccupiedCenter::distance(const Vec3& p) const {
  const auto [nx, ny, nz] = geom_.dims;
  // Continuous lattice coordinates: voxel centers at integers.
  const Vec3 u = (p - geom_.origin) / geom_.voxel_size - Vec3::Constant(0.5);
  std::array<std::int64_t, 3> q{};
  for (int k = 0; k < 3; ++k) {
    q[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(u[k])), 0,
                                    static_cast<std::int64_t>(geom_.dims[k]) - 1);
  }
  const Vec3 qc(static_cast<double>(q[0]), static_cast<double>(q[1]), static_cast<double>(q[2]));
  // |p - s| <= |q - s*| + |p - q| for the site s* nearest to q.
  const double bound = std::sqrt(edt_sq_[geom_.index(static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                                     static_cast<std::uint32_t>(q[2]))]) +
                       (u - qc).norm();
  double best = bound * bound * (1.0 + 1e-12) + 1e-12;

  const auto ix = static_cast<std::size_t>(
      std::clamp<double>(std::floor(u.x()), 0.0, static_cast<double>(nx) - 1.0));
  const std::int64_t y_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(u.y() - bound)) - 1);
  const std::int64_t y_hi = std::min<std::int64_t>(ny - 1, static_cast<std::int64_t>(std::floor(u.y() + bound)) + 1);
  for (std::int64_t y = y_lo; y <= y_hi; ++y) {
    const double dy2 = (u.y() - static_cast<double>(y)) * (u.y() - static_cast<double>(y));
    if (dy2 > best) continue;
    const double rz = std::sqrt(best - dy2);
    const std::int64_t z_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(u.z() - rz)) - 1);
    const std::int64_t z_hi = std::min<std::int64_t>(nz - 1, static_cast<std::int64_t>(std::floor(u.z() + rz)) + 1);
    for (std::int64_t z = z_lo; z <= z_hi; ++z) {
      const double dz2 = (u.z() - static_cast<double>(z)) * (u.z() - static_cast<double>(z));
      const double dyz = dy2 + dz2;
      if (dyz > best) continue;
      const std::size_t row = (static_cast<std::size_t>(y) * nz + static_cast<std::size_t>(z)) * nx;
      for (const std::int32_t s : {left_[row + ix], right_[row + ix]}) {
        if (s < 0) continue;
        const double dx = u.x() - s;
        best = std::min(best, dx * dx + dyz);
      }
    }
  }
  return std::sqrt(best) * geom_.voxel_size;
}

}  // namespace gaussocc
