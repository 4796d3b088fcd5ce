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

#include "lowpp/pauli.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace lowpp {

namespace {

// Phase exponent e of sigma_a * sigma_b = i^e * sigma_c for one site,
// indexed by x_a + 2 z_a + 4 x_b + 8 z_b. The (x,z) encoding orders
// operands as I, X, Z, Y. Exponents are mod 4.
constexpr int kPhaseTable[16] = {
    // b = I        (a = I, X, Z, Y)
    0, 0, 0, 0,
    // b = X
    0, 0, 1, 3,
    // b = Z
    0, 3, 0, 1,
    // b = Y
    0, 1, 3, 0};

}  // namespace

void PauliString::check_qubit(uint32_t q) const {
  if (q >= n_) throw std::out_of_range("PauliString: qubit index out of range");
}

PauliString PauliString::from_text(std::string_view text) {
  PauliString p(static_cast<uint32_t>(text.size()));
  for (uint32_t q = 0; q < text.size(); ++q) p.set(q, text[q]);
  return p;
}

PauliString PauliString::single(uint32_t n, uint32_t qubit, char letter) {
  PauliString p(n);
  p.set(qubit, letter);
  return p;
}

std::string PauliString::to_text() const {
  std::string s(n_, 'I');
  for (uint32_t q = 0; q < n_; ++q) s[q] = letter(q);
  return s;
}

char PauliString::letter(uint32_t q) const {
  check_qubit(q);
  const bool x = x_bit(q), z = z_bit(q);
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

void PauliString::set(uint32_t q, char letter) {
  check_qubit(q);
  uint64_t mask = uint64_t{1} << (q & 63);
  uint64_t& xw = x_[q >> 6];
  uint64_t& zw = z_[q >> 6];
  xw &= ~mask;
  zw &= ~mask;
  switch (letter) {
    case 'I': break;
    case 'X': xw |= mask; break;
    case 'Y': xw |= mask; zw |= mask; break;
    case 'Z': zw |= mask; break;
    default: throw std::invalid_argument("PauliString: letter must be one of I,X,Y,Z");
  }
}

uint32_t PauliString::weight() const {
  uint32_t w = 0;
  for (size_t i = 0; i < x_.size(); ++i) w += std::popcount(x_[i] | z_[i]);
  return w;
}

bool PauliString::is_identity() const {
  for (size_t i = 0; i < x_.size(); ++i)
    if (x_[i] | z_[i]) return false;
  return true;
}

std::vector<uint32_t> PauliString::support() const {
  std::vector<uint32_t> qs;
  for (uint32_t q = 0; q < n_; ++q)
    if (x_bit(q) || z_bit(q)) qs.push_back(q);
  return qs;
}

bool PauliString::commutes_with(const PauliString& other) const {
  if (n_ != other.n_) throw std::invalid_argument("commutes_with: qubit count mismatch");
  uint32_t anti = 0;
  for (size_t i = 0; i < x_.size(); ++i)
    anti ^= std::popcount(x_[i] & other.z_[i]) ^ std::popcount(z_[i] & other.x_[i]);
  return (anti & 1) == 0;
}

size_t PauliString::hash() const {
  uint64_t h = 0xcbf29ce484222325ull ^ n_;
  for (uint64_t w : x_) {
    h ^= w;
    h *= 0x100000001b3ull;
  }
  for (uint64_t w : z_) {
    h ^= w;
    h *= 0x100000001b3ull;
  }
  return static_cast<size_t>(h ^ (h >> 32));
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("multiply: qubit count mismatch");
  PauliProduct out;
  PauliString prod(a.num_qubits());
  int phase = 0;
  const auto& ax = a.x_words();
  const auto& az = a.z_words();
  const auto& bx = b.x_words();
  const auto& bz = b.z_words();
  for (size_t w = 0; w < ax.size(); ++w) {
    uint64_t busy = ax[w] | az[w] | bx[w] | bz[w];
    while (busy) {
      int bit = std::countr_zero(busy);
      busy &= busy - 1;
      int idx = static_cast<int>(((ax[w] >> bit) & 1) | (((az[w] >> bit) & 1) << 1) |
                                 (((bx[w] >> bit) & 1) << 2) | (((bz[w] >> bit) & 1) << 3));
      phase += kPhaseTable[idx];
      uint32_t q = static_cast<uint32_t>(w * 64 + bit);
      bool x = ((ax[w] ^ bx[w]) >> bit) & 1;
      bool z = ((az[w] ^ bz[w]) >> bit) & 1;
      if (x || z) prod.set(q, x ? (z ? 'Y' : 'X') : 'Z');
    }
  }
  out.pauli = std::move(prod);
  out.phase_power = phase & 3;
  return out;
}

void PauliSum::add(const PauliString& p, double coeff) {
  auto [it, inserted] = terms_.try_emplace(p, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void PauliSum::prune(double threshold) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < threshold)
      it = terms_.erase(it);
    else
      ++it;
  }
}

double PauliSum::coeff(const PauliString& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? 0.0 : it->second;
}

double PauliSum::squared_norm() const {
  double s = 0;
  for (const auto& [p, c] : terms_) s += c * c;
  return s;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  for (const auto& [p, c] : other.terms_) add(p, c);
  return *this;
}

}  // namespace lowpp
