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

#ifndef FPIM_PARALLEL_HPP_
#define FPIM_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fpim {

// Worker count from FPIM_WORKERS, else hardware concurrency (at least 1).
unsigned default_workers();

// Runs fn(chunk) for chunk in [0, chunks) on up to `workers` threads.
// Callers write results into per-chunk slots, so output never depends on
// scheduling.
template <class Fn>
void for_each_chunk(std::size_t chunks, unsigned workers, Fn&& fn) {
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned n = static_cast<unsigned>(
      std::min<std::size_t>(workers, chunks));
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fpim

#endif  // FPIM_PARALLEL_HPP_
