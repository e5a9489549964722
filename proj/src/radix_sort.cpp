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

#include "gaussocc/radix_sort.hpp"

#include <array>
#include <bit>

#include "gaussocc/parallel.hpp"

namespace gaussocc {

int bit_width_of(std::uint64_t max_value) { return static_cast<int>(std::bit_width(max_value)); }

void radix_sort_by_key(std::vector<KeyIndex>& items, int key_bits) {
  constexpr int kDigitBits = 8;
  constexpr std::size_t kBuckets = std::size_t{1} << kDigitBits;
  const std::size_t n = items.size();
  if (n < 2 || key_bits <= 0) return;

  std::vector<KeyIndex> scratch(n);
  const int max_threads = parallel::max_threads();
  std::vector<std::array<std::size_t, kBuckets>> hist(static_cast<std::size_t>(max_threads));

  for (int shift = 0; shift < key_bits; shift += kDigitBits) {
    bool skip = false;
#pragma omp parallel num_threads(max_threads)
    {
#if defined(_OPENMP)
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      const auto nt = static_cast<std::size_t>(omp_get_num_threads());
#else
      const std::size_t t = 0, nt = 1;
#endif
      const std::size_t begin = n * t / nt;
      const std::size_t end = n * (t + 1) / nt;
      auto& h = hist[t];
      h.fill(0);
      for (std::size_t i = begin; i < end; ++i) ++h[(items[i].key >> shift) & (kBuckets - 1)];
#pragma omp barrier
#pragma omp single
      {
        std::size_t running = 0;
        for (std::size_t d = 0; d < kBuckets; ++d) {
          std::size_t digit_total = 0;
          for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t c = hist[k][d];
            hist[k][d] = running;
            running += c;
            digit_total += c;
          }
          if (digit_total == n) skip = true;
        }
      }
      if (!skip) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto d = (items[i].key >> shift) & (kBuckets - 1);
          scratch[h[d]++] = items[i];
        }
      }
    }
    if (!skip) items.swap(scratch);
  }
}

}  // namespace gaussocc
