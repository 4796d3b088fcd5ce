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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lowpp/circuit.hpp"
#include "lowpp/pauli.hpp"
#include "lowpp/statevector.hpp"

namespace lowpp {

inline constexpr uint32_t kUnlimited = std::numeric_limits<uint32_t>::max();

/// Truncation knobs for the Heisenberg propagation: bodyness cap k,
/// path-frequency cap l, and a coefficient prune threshold.
struct TruncationPolicy {
  uint32_t max_weight = kUnlimited;
  uint32_t max_frequency = kUnlimited;
  double min_coeff = 0.0;
};

struct PropagatedTerm {
  double coeff = 0.0;
  uint32_t frequency = 0;
};

/// The (truncated) Heisenberg-evolved observable, with per-term path
/// frequency. Deterministically ordered.
struct PropagatedOperator {
  uint32_t n = 0;
  std::map<PauliString, PropagatedTerm> terms;
  /// Count of branches dropped by the weight / frequency caps.
  uint64_t dropped_weight = 0;
  uint64_t dropped_frequency = 0;

  double squared_norm() const;
};

/// Single-rotation Heisenberg rule on one weighted term: commuting
/// generators pass the term through; anticommuting ones split it into a
/// cos branch and a sin branch (both at frequency l+1). Branches violating
/// the policy are silently dropped.
std::vector<std::pair<PauliString, PropagatedTerm>> apply_rotation_heisenberg(
    const PauliString& pauli, const PropagatedTerm& term, const Gate& gate, double theta,
    const TruncationPolicy& policy);

/// Propagates O through the circuit in reverse gate order, merging identical
/// strings (merged frequency = min over merged paths).
PropagatedOperator propagate(const Circuit& circuit, const PauliSum& observable,
                             const std::vector<double>& theta, const TruncationPolicy& policy);

/// Sum_a c_a <sv|P_a|sv>.
double expectation_from_state(const PropagatedOperator& op, const StateVector& sv);

/// CSV dump with columns pauli,coefficient,frequency.
void dump_propagated(const PropagatedOperator& op, const std::string& path);

}  // namespace lowpp
