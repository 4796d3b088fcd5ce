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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lowpp/pauli.hpp"

namespace lowpp {

/// A single Pauli rotation exp(i theta/2 G) with a trainable angle.
struct Gate {
  PauliString generator;
  uint32_t param_id = 0;
};

/// Flat gate list, applied left to right in the Schroedinger picture.
struct Circuit {
  uint32_t n = 0;
  std::vector<Gate> gates;
  uint32_t n_params = 0;
};

/// Structural record of a QCNN: per-layer block placements, the qubits
/// surviving each pooling stage, and the qubits carrying the readout.
struct QcnnLayout {
  uint32_t n = 0;
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> layers;
  /// survivors[0] is all qubits; survivors[j] is the set retained after the
  /// j-th pooling. Traced-out qubits simply never appear in later gates.
  std::vector<std::vector<uint32_t>> survivors;
  std::vector<uint32_t> readout_qubits;
};

enum class LayoutStyle { kBrick, kNonCrossing };
enum class Task { kBinary, kFourClass };

/// The fixed 15-rotation template for a general two-qubit unitary:
/// Rz,Ry,Rz on each qubit, then XX, YY, ZZ, then Rz,Ry,Rz on each qubit.
/// Parameter ids are consecutive from base_param_id.
std::vector<Gate> decompose_two_qubit_block(uint32_t n, uint32_t q1, uint32_t q2,
                                            uint32_t base_param_id);

/// Builds the full QCNN: alternating convolutional layers over the current
/// survivors and poolings that retain every second survivor, down to a
/// single qubit.
std::pair<Circuit, QcnnLayout> build_qcnn(uint32_t n, LayoutStyle style);

/// Binary -> [Z on the readout qubit]; four-class -> [Z_a, Z_b, Z_a Z_b],
/// which suffices to reconstruct all four bitstring probabilities.
std::vector<PauliString> readout_observables(const QcnnLayout& layout, Task task);

void save_circuit(const Circuit& c, const std::string& path);
Circuit load_circuit(const std::string& path);
void save_layout(const QcnnLayout& l, const std::string& path);
QcnnLayout load_layout(const std::string& path);

}  // namespace lowpp
