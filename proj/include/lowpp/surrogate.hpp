// Copyright 2026 The lowpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lowpp/pauli.hpp"
#include "lowpp/propagation.hpp"
#include "lowpp/shadows.hpp"

namespace lowpp {

/// Reusable record of how Pauli paths split and merge under Heisenberg
/// propagation. Built once per (circuit, observable, policy); numeric
/// evaluation at any theta then reproduces propagate() term for term.
///
/// Each non-root node's value is
///   cos(theta[pid]) * v[cos_parent] + sin_sign * sin(theta[pid]) * v[sin_parent]
/// with either parent possibly absent. Root nodes carry the observable's
/// initial coefficients. Pass-through (commuting) steps reuse the parent
/// node, so only splits and merges allocate.
struct SurrogateGraph {
  struct Node {
    int32_t cos_parent = -1;
    int32_t sin_parent = -1;
    uint32_t param_id = 0;
    int8_t sin_sign = 1;
  };
  struct Leaf {
    PauliString pauli;
    uint32_t node = 0;
    uint32_t frequency = 0;
  };

  uint32_t n = 0;
  uint32_t n_params = 0;
  uint32_t n_roots = 0;  // nodes [0, n_roots) are roots
  std::vector<Node> nodes;
  std::vector<double> root_values;
  std::vector<Leaf> leaves;
  uint64_t dropped_weight = 0;
  uint64_t dropped_frequency = 0;
};

/// Leaves picked for evaluation, plus the topologically ordered node subset
/// their values depend on.
struct ActiveSet {
  std::vector<uint32_t> leaf_indices;
  std::vector<double> scores;  // selection score per chosen leaf (empty if n/a)
  uint32_t window = 0;         // 0 = no support-window filter applied
  bool truncated = false;      // true when M exceeded the candidate count
  std::vector<uint32_t> eval_order;  // ascending node ids needed
};

/// Cap on graph size; exceeding it raises a resource error naming the count.
inline constexpr size_t kDefaultMaxSurrogateNodes = 100'000'000;

/// Builds the split/merge graph by running the propagation once with
/// symbolic coefficients. policy.min_coeff must be 0 (coefficient pruning is
/// theta-dependent and cannot be recorded in a reusable graph).
SurrogateGraph surrogate_build(const Circuit& circuit, const PauliSum& observable,
                               const TruncationPolicy& policy,
                               size_t max_nodes = kDefaultMaxSurrogateNodes);

/// Active set containing every leaf.
ActiveSet all_leaves(const SurrogateGraph& graph);

/// Active set over an explicit leaf-index list (used when restoring a saved
/// selection); computes the dependency order, leaves scores empty.
ActiveSet make_active(const SurrogateGraph& graph, std::vector<uint32_t> leaf_indices);

/// Ranks leaves by the empirical variance of their feature column across the
/// dataset; optionally first restricts to leaves whose support fits in a
/// contiguous window of `window` qubits; keeps the top M.
ActiveSet select_active(const SurrogateGraph& graph, const FeatureTable& features, size_t M,
                        uint32_t window = 0);

/// Values of the nodes in active.eval_order (plus roots), indexed by node
/// id; untouched entries are unspecified.
std::vector<double> surrogate_forward(const SurrogateGraph& graph, const ActiveSet& active,
                                      const std::vector<double>& theta);

/// Sum over active leaves of feature[leaf.pauli] * leaf coefficient(theta).
double surrogate_evaluate(const SurrogateGraph& graph, const ActiveSet& active,
                          const std::vector<double>& theta,
                          const std::unordered_map<PauliString, double, PauliStringHash>&
                              feature_row);

/// Exact reverse-mode d(surrogate_evaluate)/d(theta).
std::vector<double> surrogate_gradient(const SurrogateGraph& graph, const ActiveSet& active,
                                       const std::vector<double>& theta,
                                       const std::unordered_map<PauliString, double,
                                                                PauliStringHash>& feature_row);

/// Lower-level reverse pass for batched training: given forward values and
/// adjoints seeded on the active leaves' nodes (leaf_adjoints[i] pairs with
/// active.leaf_indices[i]), accumulates d(sum_i adj_i * coeff_i)/d(theta).
std::vector<double> surrogate_backward(const SurrogateGraph& graph, const ActiveSet& active,
                                       const std::vector<double>& theta,
                                       const std::vector<double>& values,
                                       const std::vector<double>& leaf_adjoints);

/// Binary persistence; load reproduces evaluations bit-exactly.
void save_surrogate(const SurrogateGraph& graph, const std::string& path);
SurrogateGraph load_surrogate(const std::string& path);

}  // namespace lowpp
