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
#include <map>
#include <string>
#include <vector>

#include "lowpp/circuit.hpp"

namespace lowpp {

/// Average weight-resolved purity of the Heisenberg-evolved observable over
/// random (2-design) gate draws: values[k] = E[p^(k)], k = 0..n. For a
/// traceless observable p^(0) = 0 and the k >= 1 values sum to 1.
struct PurityDistribution {
  uint32_t n = 0;
  std::vector<double> values;   // index k, size n+1
  std::vector<double> stderrs;  // MC only; empty otherwise
  std::string method;
  /// Records the normalization pinned by the exact Haar oracle: final
  /// {i,s}-string with sigma s-sites contributes A * C(sigma,k) *
  /// (3/2)^k * (1/2)^(sigma-k) to p^(k); start amplitude 2/3.
  std::string convention =
      "start=(2/3)s; split=(3/2)^k(1/2)^(sigma-k)binom(sigma,k)";
};

/// Sparse second-moment state: strings over {i,s} (one letter per qubit)
/// with nonnegative amplitudes.
using IsState = std::map<std::string, double>;

/// The 2-design average of one two-qubit block on the {i,s} pair basis:
/// |ii> and |ss> are fixed; |is> and |si> map to (2/5)(|ii> + |ss>).
IsState pgate_apply(const IsState& state, uint32_t q1, uint32_t q2);

/// Propagates (2/3)|s at observable_qubit, i elsewhere> through one P-gate
/// per block in reverse circuit order and converts the result to purities.
/// Exact for any layout (brick included; merging handled sparsely).
PurityDistribution purities_network(const QcnnLayout& layout, uint32_t observable_qubit);

/// Closed-form layer recursion for the non-crossing tree of depth L
/// (n = 2^L qubits): dynamic program over the per-layer s-pair counts with
/// binomial branch multiplicities and per-pair amplitude 2/5.
PurityDistribution purities_recursive(uint32_t L);

/// Monte-Carlo oracle: draws Haar two-qubit unitaries per block, conjugates
/// the observable exactly through 16x16 Pauli transfer matrices on the full
/// 4^n coefficient vector, and averages the weight-resolved squared
/// coefficients. Requires n <= 10.
PurityDistribution purities_mc(const QcnnLayout& layout, uint32_t observable_qubit,
                               size_t samples, uint64_t seed);

/// CSV with columns k,value,stderr,method (stderr blank unless MC).
void save_purities(const PurityDistribution& dist, const std::string& path);

}  // namespace lowpp
