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

#include <complex>
#include <vector>

#include "lowpp/circuit.hpp"
#include "lowpp/pauli.hpp"
#include "lowpp/rng.hpp"

namespace lowpp {

using StateVector = std::vector<std::complex<double>>;

/// Dense simulation is capped here; everything above must go through
/// shadows or imported data.
inline constexpr uint32_t kMaxOracleQubits = 20;

StateVector zero_state(uint32_t n);

/// Haar-random product state (independent single-qubit states).
StateVector random_product_state(uint32_t n, Rng& rng);

/// out = P |psi>.
StateVector apply_pauli(const PauliString& p, const StateVector& psi);

/// In place: psi <- exp(i theta/2 G) psi = cos(theta/2) psi + i sin(theta/2) G psi.
void apply_pauli_rotation(const PauliString& generator, double theta, StateVector& psi);

/// Exact Schroedinger evolution, gates applied left to right.
void run_circuit(const Circuit& circuit, const std::vector<double>& theta, StateVector& psi);

/// <psi| P |psi>, physics convention (in [-1, 1] for normalized psi).
double exact_expectation(const StateVector& psi, const PauliString& p);

double norm_squared(const StateVector& psi);

/// |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

}  // namespace lowpp
