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
#include <string_view>
#include <vector>

namespace lowpp {

/// An n-qubit Pauli string stored as two bit sequences. Site q carries
/// I/X/Y/Z for (x,z) = (0,0)/(1,0)/(1,1)/(0,1). Qubit 1 of the textual
/// format ("ZIIX", qubit 1 leftmost) is bit 0 of word 0.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(uint32_t n) : n_(n), x_(words(n), 0), z_(words(n), 0) {}

  static PauliString from_text(std::string_view text);
  static PauliString single(uint32_t n, uint32_t qubit, char letter);
  std::string to_text() const;

  uint32_t num_qubits() const { return n_; }
  bool x_bit(uint32_t q) const { return (x_[q >> 6] >> (q & 63)) & 1; }
  bool z_bit(uint32_t q) const { return (z_[q >> 6] >> (q & 63)) & 1; }
  char letter(uint32_t q) const;
  void set(uint32_t q, char letter);

  uint32_t weight() const;
  bool is_identity() const;
  std::vector<uint32_t> support() const;

  bool commutes_with(const PauliString& other) const;

  const std::vector<uint64_t>& x_words() const { return x_; }
  const std::vector<uint64_t>& z_words() const { return z_; }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_;
  }
  friend bool operator!=(const PauliString& a, const PauliString& b) { return !(a == b); }
  // Canonical order: x bits first, then z bits, qubit 1 lowest.
  friend bool operator<(const PauliString& a, const PauliString& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    if (a.x_ != b.x_) return a.x_ < b.x_;
    return a.z_ < b.z_;
  }

  size_t hash() const;

 private:
  static uint32_t words(uint32_t n) { return (n + 63) / 64; }
  void check_qubit(uint32_t q) const;

  uint32_t n_ = 0;
  std::vector<uint64_t> x_, z_;
};

struct PauliStringHash {
  size_t operator()(const PauliString& p) const { return p.hash(); }
};

/// Result of a Pauli product: the global phase is i^phase_power (mod 4).
struct PauliProduct {
  int phase_power = 0;
  PauliString pauli;
};

/// Sitewise product a*b with accumulated global phase.
PauliProduct multiply(const PauliString& a, const PauliString& b);

/// Sparse real-weighted sum of Pauli strings. Merging adds coefficients;
/// keys are canonically ordered so iteration is deterministic.
class PauliSum {
 public:
  using Terms = std::map<PauliString, double>;

  PauliSum() = default;

  void add(const PauliString& p, double coeff);
  /// Removes terms with |coeff| < threshold.
  void prune(double threshold);

  double coeff(const PauliString& p) const;
  double squared_norm() const;
  size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Terms::const_iterator begin() const { return terms_.begin(); }
  Terms::const_iterator end() const { return terms_.end(); }

  PauliSum& operator+=(const PauliSum& other);

 private:
  Terms terms_;
};

}  // namespace lowpp
