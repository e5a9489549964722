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
#include <cstdint>
#include <vector>

namespace gaussocc {

struct KeyIndex {
  std::uint64_t key;
  std::uint64_t index;
};

// Stable LSD radix sort by key, 8 bits per pass, over the low `key_bits` bits
// (higher bits must be zero). Each pass histograms contiguous per-thread
// chunks and scatters them in chunk order, so the output is the unique stable
// order whatever the thread count.
void radix_sort_by_key(std::vector<KeyIndex>& items, int key_bits = 64);

// Number of significant bits needed to hold values in [0, max_value].
int bit_width_of(std::uint64_t max_value);

}  // namespace gaussocc
