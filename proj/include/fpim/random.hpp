// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FPIM_RANDOM_HPP_
#define FPIM_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fpim {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for (master, stream). Streams never share state, so
// parallel work keyed by stream index is reproducible for any worker count.
Rng make_stream(std::uint64_t master, std::uint64_t stream);

// Stable 64-bit tag for named streams ("world", "eval", ...).
std::uint64_t stream_tag(std::string_view name);
std::uint64_t mix_tags(std::uint64_t a, std::uint64_t b);

// 53-bit uniform in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n), n > 0 (Lemire's method).
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace fpim

#endif  // FPIM_RANDOM_HPP_
