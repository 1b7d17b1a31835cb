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

#ifndef FPIM_DIFFUSION_HPP_
#define FPIM_DIFFUSION_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/graph.hpp"
#include "fpim/random.hpp"
#include "fpim/seed_model.hpp"

namespace fpim {

// live[e] != 0 iff edge e is live.
struct DiffusionRealization {
  std::vector<std::uint8_t> live;
};

DiffusionRealization sample_realization(const Graph& g, Rng& rng);

struct SpreadResult {
  NodeSet influenced;
  std::size_t count = 0;
};

// Nodes reachable from seeds over live edges.
SpreadResult propagate(const Graph& g, const NodeSet& seeds,
                       const DiffusionRealization& real);

// Like propagate, but nodes flagged in `blocked` are neither entered nor
// counted (diffusion on the residual graph of an adaptive run).
SpreadResult propagate_residual(const Graph& g, const NodeSet& seeds,
                                const DiffusionRealization& real,
                                const std::vector<std::uint8_t>& blocked);

struct SpreadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
};

// Runs are split into fixed chunks, each with its own stream derived from
// `seed`, so the result is identical for every worker count.
SpreadEstimate monte_carlo_spread(const Graph& g, const NodeSet& seeds,
                                  std::size_t runs, std::uint64_t seed,
                                  unsigned workers = 0);

SpreadEstimate spread_under_allocation(const Graph& g,
                                       const DiscountAllocation& alloc,
                                       const ProfileMap& profiles,
                                       std::size_t runs, std::uint64_t seed,
                                       unsigned workers = 0);

}  // namespace fpim

#endif  // FPIM_DIFFUSION_HPP_
