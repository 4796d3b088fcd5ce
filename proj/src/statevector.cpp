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

#include "lowpp/statevector.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace lowpp {

namespace {

void check_size(uint32_t n) {
  if (n > kMaxOracleQubits)
    throw std::invalid_argument("statevector oracle limited to n <= " +
                                std::to_string(kMaxOracleQubits));
}

struct PauliMasks {
  uint64_t x = 0, z = 0;
  std::complex<double> y_phase = 1.0;  // i^{number of Y sites}
};

PauliMasks masks_of(const PauliString& p) {
  check_size(p.num_qubits());
  PauliMasks m;
  m.x = p.x_words().empty() ? 0 : p.x_words()[0];
  m.z = p.z_words().empty() ? 0 : p.z_words()[0];
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  m.y_phase = ipow[std::popcount(m.x & m.z) & 3];
  return m;
}

inline double parity_sign(uint64_t v) { return (std::popcount(v) & 1) ? -1.0 : 1.0; }

}  // namespace

StateVector zero_state(uint32_t n) {
  check_size(n);
  StateVector psi(size_t{1} << n, 0.0);
  psi[0] = 1.0;
  return psi;
}

StateVector random_product_state(uint32_t n, Rng& rng) {
  check_size(n);
  StateVector psi{1.0};
  for (uint32_t q = 0; q < n; ++q) {
    double polar = std::acos(1.0 - 2.0 * rng.uniform());
    double azim = rng.uniform(0.0, 2.0 * M_PI);
    std::complex<double> a0 = std::cos(polar / 2);
    std::complex<double> a1 = std::polar(std::sin(polar / 2), azim);
    StateVector next(psi.size() * 2);
    // Qubit q toggles bit q of the basis index.
    for (size_t b = 0; b < psi.size(); ++b) {
      next[b] = psi[b] * a0;
      next[b | (size_t{1} << q)] = psi[b] * a1;
    }
    psi = std::move(next);
  }
  return psi;
}

StateVector apply_pauli(const PauliString& p, const StateVector& psi) {
  PauliMasks m = masks_of(p);
  StateVector out(psi.size());
  for (size_t b = 0; b < psi.size(); ++b)
    out[b ^ m.x] = m.y_phase * parity_sign(m.z & b) * psi[b];
  return out;
}

void apply_pauli_rotation(const PauliString& generator, double theta, StateVector& psi) {
  PauliMasks m = masks_of(generator);
  double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const std::complex<double> is(0.0, s);
  if (m.x == 0) {
    for (size_t b = 0; b < psi.size(); ++b)
      psi[b] *= std::complex<double>(c, parity_sign(m.z & b) * s);
    return;
  }
  uint64_t top = uint64_t{1} << (63 - std::countl_zero(m.x));
  for (size_t b = 0; b < psi.size(); ++b) {
    if (b & top) continue;
    size_t b2 = b ^ m.x;
    std::complex<double> a0 = psi[b], a1 = psi[b2];
    std::complex<double> f0 = m.y_phase * parity_sign(m.z & b);
    std::complex<double> f1 = m.y_phase * parity_sign(m.z & b2);
    psi[b] = c * a0 + is * f1 * a1;
    psi[b2] = c * a1 + is * f0 * a0;
  }
}

void run_circuit(const Circuit& circuit, const std::vector<double>& theta, StateVector& psi) {
  if (theta.size() != circuit.n_params)
    throw std::invalid_argument("run_circuit: parameter count mismatch");
  if (psi.size() != (size_t{1} << circuit.n))
    throw std::invalid_argument("run_circuit: state dimension mismatch");
  for (const auto& g : circuit.gates) apply_pauli_rotation(g.generator, theta[g.param_id], psi);
}

double exact_expectation(const StateVector& psi, const PauliString& p) {
  PauliMasks m = masks_of(p);
  std::complex<double> acc = 0.0;
  for (size_t b = 0; b < psi.size(); ++b)
    acc += std::conj(psi[b ^ m.x]) * m.y_phase * parity_sign(m.z & b) * psi[b];
  return acc.real();
}

double norm_squared(const StateVector& psi) {
  double s = 0;
  for (const auto& a : psi) s += std::norm(a);
  return s;
}

double fidelity(const StateVector& a, const StateVector& b) {
  std::complex<double> acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return std::norm(acc);
}

}  // namespace lowpp
