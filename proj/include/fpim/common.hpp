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

#ifndef FPIM_COMMON_HPP_
#define FPIM_COMMON_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpim {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Absolute tolerance for every budget comparison.
inline constexpr double kBudgetTol = 1e-9;

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Missing or unreadable input files.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sorted, duplicate-free set of node ids.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids) : members_(ids) { normalize(); }
  explicit NodeSet(std::vector<NodeId> ids) : members_(std::move(ids)) {
    normalize();
  }

  bool contains(NodeId u) const {
    return std::binary_search(members_.begin(), members_.end(), u);
  }
  void insert(NodeId u) {
    auto it = std::lower_bound(members_.begin(), members_.end(), u);
    if (it == members_.end() || *it != u) members_.insert(it, u);
  }
  void erase(NodeId u) {
    auto it = std::lower_bound(members_.begin(), members_.end(), u);
    if (it != members_.end() && *it == u) members_.erase(it);
  }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  NodeId operator[](std::size_t i) const { return members_[i]; }
  const std::vector<NodeId>& members() const { return members_; }

  // Throws ArgumentError if any member is >= n.
  void check_range(std::size_t n, const char* what) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  void normalize() {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
  }
  std::vector<NodeId> members_;
};

NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool is_subset(const NodeSet& a, const NodeSet& b);

}  // namespace fpim

#endif  // FPIM_COMMON_HPP_
