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

#include "lowpp/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lowpp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

uint8_t basis_code(char letter) {
  switch (letter) {
    case 'X': return 0;
    case 'Y': return 1;
    case 'Z': return 2;
  }
  throw std::invalid_argument(std::string("bad basis letter: ") + letter);
}

// Rotates qubit q of psi into the computational basis of the chosen
// measurement basis, in place.
void rotate_to_basis(StateVector& psi, uint32_t q, uint8_t code) {
  if (code == 2) return;  // Z: nothing to do
  const size_t bit = size_t{1} << q;
  for (size_t b = 0; b < psi.size(); ++b) {
    if (b & bit) continue;
    std::complex<double> a0 = psi[b], a1 = psi[b | bit];
    if (code == 0) {  // X basis: <+-| rows
      psi[b] = (a0 + a1) * kInvSqrt2;
      psi[b | bit] = (a0 - a1) * kInvSqrt2;
    } else {  // Y basis: <+i| = (<0| - i<1|)/sqrt2
      const std::complex<double> ia1(a1.imag(), -a1.real());  // -i*a1
      psi[b] = (a0 + ia1) * kInvSqrt2;
      psi[b | bit] = (a0 - ia1) * kInvSqrt2;
    }
  }
}

double sum_abs2_half(const StateVector& psi, size_t bit, bool upper) {
  double s = 0;
  for (size_t b = 0; b < psi.size(); ++b)
    if (((b & bit) != 0) == upper) s += std::norm(psi[b]);
  return s;
}

}  // namespace

int FeatureTable::column_index(const PauliString& p) const {
  for (size_t j = 0; j < ops.size(); ++j)
    if (ops[j] == p) return static_cast<int>(j);
  return -1;
}

ShadowSet sample_shadows(const StateVector& sv, uint32_t n, size_t S, uint64_t seed) {
  if (sv.size() != (size_t{1} << n))
    throw std::invalid_argument("sample_shadows: state dimension mismatch");
  if (n > kMaxOracleQubits)
    throw std::invalid_argument("sample_shadows: n exceeds the dense-state limit");
  ShadowSet set;
  set.n = n;
  set.seed = seed;
  set.records.reserve(S);
  Rng rng(seed);
  StateVector work;
  for (size_t r = 0; r < S; ++r) {
    ShadowRecord rec;
    rec.basis.resize(n);
    rec.outcomes.resize(n);
    for (uint32_t q = 0; q < n; ++q)
      rec.basis[q] = static_cast<uint8_t>(rng.uniform_index(3));
    work = sv;
    for (uint32_t q = 0; q < n; ++q) {
      rotate_to_basis(work, q, rec.basis[q]);
      const size_t bit = size_t{1} << q;
      double s0 = sum_abs2_half(work, bit, false);
      double s1 = sum_abs2_half(work, bit, true);
      double p0 = s0 / (s0 + s1);
      bool outcome1 = rng.uniform() >= p0;
      rec.outcomes[q] = outcome1 ? 1 : 0;
      // Project: zero the rejected half (no renormalization; ratios of the
      // remaining mass stay exact).
      for (size_t b = 0; b < work.size(); ++b)
        if (((b & bit) != 0) != outcome1) work[b] = 0.0;
    }
    set.records.push_back(std::move(rec));
  }
  return set;
}

namespace {

double estimate_range(const ShadowSet& set, const PauliString& p, size_t begin, size_t end) {
  std::vector<std::pair<uint32_t, uint8_t>> need;  // (qubit, basis code)
  for (uint32_t q : p.support()) need.emplace_back(q, basis_code(p.letter(q)));
  double acc = 0;
  for (size_t r = begin; r < end; ++r) {
    const auto& rec = set.records[r];
    double prod = 1;
    for (auto [q, code] : need) {
      if (rec.basis[q] != code) {
        prod = 0;
        break;
      }
      prod *= rec.outcomes[q] ? -3.0 : 3.0;
    }
    acc += prod;
  }
  return acc / static_cast<double>(end - begin);
}

}  // namespace

double estimate(const ShadowSet& set, const PauliString& p) {
  if (set.records.empty()) throw std::invalid_argument("estimate: empty record set");
  if (p.weight() == 0) throw std::invalid_argument("estimate: identity operator");
  return estimate_range(set, p, 0, set.records.size());
}

double estimate_median_of_means(const ShadowSet& set, const PauliString& p, size_t groups) {
  if (groups == 0 || set.records.size() < groups)
    throw std::invalid_argument("estimate_median_of_means: bad group count");
  std::vector<double> means;
  size_t S = set.records.size();
  for (size_t g = 0; g < groups; ++g)
    means.push_back(estimate_range(set, p, g * S / groups, (g + 1) * S / groups));
  std::sort(means.begin(), means.end());
  size_t mid = groups / 2;
  return (groups % 2) ? means[mid] : 0.5 * (means[mid - 1] + means[mid]);
}

FeatureTable build_feature_table(const std::vector<ShadowSet>& sets,
                                 const std::vector<PauliString>& ops) {
  FeatureTable table;
  table.ops = ops;
  for (const auto& set : sets) {
    if (!sets.empty() && set.n != sets.front().n)
      throw std::invalid_argument("build_feature_table: mixed qubit counts");
    table.state_ids.push_back(set.state_id);
    table.labels.push_back(set.label);
    std::vector<double> row;
    row.reserve(ops.size());
    for (const auto& p : ops) row.push_back(estimate(set, p));
    table.rows.push_back(std::move(row));
  }
  return table;
}

FeatureTable build_feature_table_exact(const std::vector<StateVector>& states,
                                       const std::vector<std::string>& state_ids,
                                       const std::vector<int>& labels,
                                       const std::vector<PauliString>& ops) {
  if (states.size() != state_ids.size() || states.size() != labels.size())
    throw std::invalid_argument("build_feature_table_exact: length mismatch");
  FeatureTable table;
  table.ops = ops;
  table.state_ids = state_ids;
  table.labels = labels;
  for (const auto& sv : states) {
    std::vector<double> row;
    row.reserve(ops.size());
    for (const auto& p : ops) row.push_back(exact_expectation(sv, p));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void save_shadows(const ShadowSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_shadows: cannot open " + path);
  out << "n=" << set.n << " state=" << set.state_id << " label=" << set.label
      << " shots=" << set.records.size() << " seed=" << set.seed << "\n";
  std::string basis(set.n, '?'), bits(set.n, '?');
  for (const auto& rec : set.records) {
    for (uint32_t q = 0; q < set.n; ++q) {
      basis[q] = basis_letter(rec.basis[q]);
      bits[q] = rec.outcomes[q] ? '1' : '0';
    }
    out << basis << " " << bits << "\n";
  }
}

ShadowSet load_shadows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_shadows: cannot open " + path);
  ShadowSet set;
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("load_shadows: empty file " + path);
  size_t shots = 0;
  std::istringstream hs(header);
  std::string field;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_shadows: bad header field " + field);
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "n") set.n = static_cast<uint32_t>(std::stoul(val));
    else if (key == "state") set.state_id = val;
    else if (key == "label") set.label = std::stoi(val);
    else if (key == "shots") shots = std::stoull(val);
    else if (key == "seed") set.seed = std::stoull(val);
    else throw std::runtime_error("load_shadows: unknown header key " + key);
  }
  if (set.n == 0) throw std::runtime_error("load_shadows: missing n in header");
  std::string basis, bits;
  while (in >> basis >> bits) {
    if (basis.size() != set.n || bits.size() != set.n)
      throw std::runtime_error("load_shadows: record length mismatch");
    ShadowRecord rec;
    rec.basis.resize(set.n);
    rec.outcomes.resize(set.n);
    for (uint32_t q = 0; q < set.n; ++q) {
      rec.basis[q] = basis_code(basis[q]);
      if (bits[q] != '0' && bits[q] != '1')
        throw std::runtime_error("load_shadows: bad outcome bit");
      rec.outcomes[q] = bits[q] == '1';
    }
    set.records.push_back(std::move(rec));
  }
  if (shots != set.records.size())
    throw std::runtime_error("load_shadows: record count does not match header");
  return set;
}

void save_feature_table(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_feature_table: cannot open " + path);
  out << "state_id,label";
  for (const auto& p : table.ops) out << "," << p.to_text();
  out << "\n";
  out.precision(17);
  for (size_t s = 0; s < table.rows.size(); ++s) {
    out << table.state_ids[s] << "," << table.labels[s];
    for (double v : table.rows[s]) out << "," << v;
    out << "\n";
  }
}

FeatureTable load_feature_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_feature_table: cannot open " + path);
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_feature_table: empty " + path);
  std::istringstream hs(line);
  std::string cell;
  std::getline(hs, cell, ',');
  std::getline(hs, cell, ',');
  while (std::getline(hs, cell, ',')) table.ops.push_back(PauliString::from_text(cell));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::getline(ls, cell, ',');
    table.state_ids.push_back(cell);
    std::getline(ls, cell, ',');
    table.labels.push_back(std::stoi(cell));
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.ops.size())
      throw std::runtime_error("load_feature_table: row length mismatch");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace lowpp
