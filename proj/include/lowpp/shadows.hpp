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
#include <vector>

#include "lowpp/pauli.hpp"
#include "lowpp/rng.hpp"
#include "lowpp/statevector.hpp"

namespace lowpp {

/// One randomized single-shot measurement: a per-qubit basis choice
/// (0=X, 1=Y, 2=Z) and the measured bit per qubit (bit b = eigenvalue
/// (-1)^b).
struct ShadowRecord {
  std::vector<uint8_t> basis;
  std::vector<uint8_t> outcomes;
};

/// All snapshots taken of one state, with identification metadata.
struct ShadowSet {
  uint32_t n = 0;
  std::string state_id;
  int label = 0;
  uint64_t seed = 0;
  std::vector<ShadowRecord> records;
};

/// Estimated expectations of a fixed operator list across many states.
struct FeatureTable {
  std::vector<PauliString> ops;
  std::vector<std::string> state_ids;
  std::vector<int> labels;
  /// rows[s][j] = estimate of ops[j] on state s.
  std::vector<std::vector<double>> rows;

  /// Index of an operator column, or -1 if absent.
  int column_index(const PauliString& p) const;
};

inline char basis_letter(uint8_t code) { return code == 0 ? 'X' : code == 1 ? 'Y' : 'Z'; }

/// Draws S single-shot records from the exact measurement distribution of a
/// dense statevector, with i.i.d. uniform per-qubit bases. Deterministic in
/// the seed.
ShadowSet sample_shadows(const StateVector& sv, uint32_t n, size_t S, uint64_t seed);

/// Mean over records of prod_{q in supp(P)} 3*(-1)^{outcome_q}, counting a
/// record as 0 unless its basis matches P's letter on every support qubit.
double estimate(const ShadowSet& set, const PauliString& p);

/// Median-of-means variant: records are split into `groups` contiguous
/// groups, each estimated independently, and the median is returned.
double estimate_median_of_means(const ShadowSet& set, const PauliString& p, size_t groups);

/// Batches estimate() over states x operators.
FeatureTable build_feature_table(const std::vector<ShadowSet>& sets,
                                 const std::vector<PauliString>& ops);

/// Noise-free variant: fills the table with exact statevector expectations.
FeatureTable build_feature_table_exact(const std::vector<StateVector>& states,
                                       const std::vector<std::string>& state_ids,
                                       const std::vector<int>& labels,
                                       const std::vector<PauliString>& ops);

/// Text format: header "n=<n> state=<id> label=<int> shots=<S> seed=<u64>",
/// then one "<basis string> <outcome bits>" line per record.
void save_shadows(const ShadowSet& set, const std::string& path);
ShadowSet load_shadows(const std::string& path);

/// CSV with columns state_id,label,<one per operator (header = Pauli text)>.
void save_feature_table(const FeatureTable& table, const std::string& path);
FeatureTable load_feature_table(const std::string& path);

}  // namespace lowpp
