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
#include "lowpp/shadows.hpp"
#include "lowpp/statevector.hpp"

namespace lowpp {

/// The four spin-chain families. All are open chains except the cluster
/// model, which is periodic.
enum class SpinModel { kXXX, kHaldane, kAnnni, kCluster };

std::string model_name(SpinModel m);
SpinModel model_from_name(const std::string& name);

/// Parameters of one Hamiltonian instance. Fields are read per model:
///   XXX:     j1 (even bonds), j2 (odd bonds)
///   Haldane: j, h1, h2
///   ANNNI:   j1, j2, b            (kappa = -j2/j1, h = b/j1)
///   Cluster: j1, j2
struct HamiltonianSpec {
  SpinModel model = SpinModel::kXXX;
  uint32_t n = 0;
  double j1 = 0, j2 = 0;
  double j = 1.0;
  double h1 = 0.5, h2 = 0;
  double b = 0;
};

/// Physics-convention Pauli decomposition with the model's exact signs.
PauliSum hamiltonian_terms(const HamiltonianSpec& spec);

struct GroundState {
  StateVector psi;
  double energy = 0;
  double gap = 0;  // E1 - E0
  bool degenerate = false;
};

/// Lowest eigenpair: dense diagonalization for small n, iterative
/// (Lanczos with full reorthogonalization) above. Deterministic, with the
/// global phase fixed so the largest-magnitude amplitude is real positive.
/// Throws on non-convergence (residual > 1e-6).
GroundState ground_state(const HamiltonianSpec& spec);

struct LabelResult {
  int label = 0;
  /// True when the label comes from an approximate phase-boundary rule
  /// rather than an exact/defined threshold.
  bool approximate = false;
};

/// Phase id per model:
///   XXX:     0 trivial (j2 < j1), 1 topological
///   Haldane: 0 paramagnetic (h2 < 0.423), 1 SPT (>= 0.423)
///   ANNNI:   0 ferromagnetic, 1 paramagnetic, 2 antiphase, 3 floating
///   Cluster: 0 trivial, 1 ferromagnetic, 2 antiferromagnetic, 3 SPT
LabelResult assign_label(const HamiltonianSpec& spec);

struct DatasetPoint {
  std::string state_id;
  HamiltonianSpec spec;
  int label = 0;
  bool approximate_label = false;
  double energy = 0;
  double gap = 0;
  std::string shadow_file;  // empty when no shadows were written
};

struct GenerateOptions {
  size_t shadows = 0;       // records per state; 0 = none
  bool exact_mode = false;  // also cache the dense statevectors
  uint64_t seed = 0;        // master seed; per-point streams derived from it
  std::string out_dir;
  /// Optional external labels overriding the built-in rules (one per grid
  /// point; empty = use assign_label).
  std::vector<int> labels;
};

/// Computes ground states over the grid, writes shadow files and/or a
/// statevector cache plus manifest.csv into out_dir, and returns the
/// manifest rows. Byte-identical outputs for identical inputs.
std::vector<DatasetPoint> generate_dataset(const std::vector<HamiltonianSpec>& grid,
                                           const GenerateOptions& options);

void save_manifest(const std::vector<DatasetPoint>& points, const std::string& path);
std::vector<DatasetPoint> load_manifest(const std::string& path);

/// Binary statevector cache: magic, n, state id, then 2^n complex pairs.
void save_statevector(const StateVector& psi, uint32_t n, const std::string& state_id,
                      const std::string& path);
StateVector load_statevector(const std::string& path, uint32_t* n_out = nullptr,
                             std::string* state_id_out = nullptr);

}  // namespace lowpp
