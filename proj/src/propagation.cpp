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

#include "lowpp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace lowpp {

namespace {

// Sign of the sin branch: P -> cos(t) P + s sin(t) Q with Q the Pauli part
// of G*P. The product phase is always +-i for anticommuting strings.
inline int sin_sign(int phase_power) { return phase_power == 1 ? 1 : -1; }

using TermMap = std::unordered_map<PauliString, PropagatedTerm, PauliStringHash>;

// One rotation applied in place over the whole term map. Anticommuting
// terms mix pairwise (P with G*P), so every new value depends only on the
// pre-gate values of its own pair and the result is independent of
// iteration order.
void apply_gate_in_place(TermMap& terms, const PauliString& generator, double theta,
                         const TruncationPolicy& policy, uint64_t& dropped_weight,
                         uint64_t& dropped_frequency) {
  struct Snap {
    PauliString pauli;
    PropagatedTerm term;
  };
  std::vector<Snap> snapshot;
  for (const auto& [p, t] : terms) {
    if (!p.commutes_with(generator)) snapshot.push_back({p, t});
  }
  if (snapshot.empty()) return;

  std::unordered_map<PauliString, size_t, PauliStringHash> index;
  index.reserve(snapshot.size() * 2);
  for (size_t i = 0; i < snapshot.size(); ++i) index.emplace(snapshot[i].pauli, i);

  const double c = std::cos(theta), s = std::sin(theta);
  for (size_t i = 0; i < snapshot.size(); ++i) {
    const auto& [p, tp] = snapshot[i];
    auto prod = multiply(generator, p);
    PauliString q = std::move(prod.pauli);
    const int sign = sin_sign(prod.phase_power);

    auto jt = index.find(q);
    const bool partner_present = jt != index.end();
    if (partner_present && jt->second < i) continue;  // pair already processed

    double cq = partner_present ? snapshot[jt->second].term.coeff : 0.0;
    uint32_t freq_q = partner_present ? snapshot[jt->second].term.frequency : tp.frequency;
    uint32_t freq_new = std::min(tp.frequency, freq_q) + 1;

    if (freq_new > policy.max_frequency) {
      dropped_frequency += partner_present ? 2 : 1;
      terms.erase(p);
      if (partner_present) terms.erase(q);
      continue;
    }

    double new_p = c * tp.coeff - sign * s * cq;
    double new_q = c * cq + sign * s * tp.coeff;

    if (new_p != 0.0 && std::abs(new_p) >= policy.min_coeff) {
      auto& slot = terms[p];
      slot.coeff = new_p;
      slot.frequency = freq_new;
    } else {
      terms.erase(p);
    }

    if (q.weight() > policy.max_weight) {
      ++dropped_weight;  // sin branch out of the bodyness cap
      continue;
    }
    if (new_q != 0.0 && std::abs(new_q) >= policy.min_coeff) {
      auto& slot = terms[q];
      slot.coeff = new_q;
      slot.frequency = freq_new;
    } else {
      terms.erase(q);
    }
  }
}

}  // namespace

double PropagatedOperator::squared_norm() const {
  double s = 0;
  for (const auto& [p, t] : terms) s += t.coeff * t.coeff;
  return s;
}

std::vector<std::pair<PauliString, PropagatedTerm>> apply_rotation_heisenberg(
    const PauliString& pauli, const PropagatedTerm& term, const Gate& gate, double theta,
    const TruncationPolicy& policy) {
  std::vector<std::pair<PauliString, PropagatedTerm>> out;
  if (pauli.commutes_with(gate.generator)) {
    out.emplace_back(pauli, term);
    return out;
  }
  uint32_t freq_new = term.frequency + 1;
  if (freq_new > policy.max_frequency) return out;
  auto prod = multiply(gate.generator, pauli);
  double c = term.coeff * std::cos(theta);
  double s = sin_sign(prod.phase_power) * term.coeff * std::sin(theta);
  if (std::abs(c) >= policy.min_coeff)
    out.emplace_back(pauli, PropagatedTerm{c, freq_new});
  if (prod.pauli.weight() <= policy.max_weight && std::abs(s) >= policy.min_coeff)
    out.emplace_back(std::move(prod.pauli), PropagatedTerm{s, freq_new});
  return out;
}

PropagatedOperator propagate(const Circuit& circuit, const PauliSum& observable,
                             const std::vector<double>& theta, const TruncationPolicy& policy) {
  if (theta.size() != circuit.n_params)
    throw std::invalid_argument("propagate: parameter count mismatch");
  PropagatedOperator result;
  result.n = circuit.n;

  TermMap terms;
  for (const auto& [p, coeff] : observable) {
    if (p.num_qubits() != circuit.n)
      throw std::invalid_argument("propagate: observable qubit count mismatch");
    if (p.weight() > policy.max_weight) {
      ++result.dropped_weight;
      continue;
    }
    terms[p] = PropagatedTerm{coeff, 0};
  }

  for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it)
    apply_gate_in_place(terms, it->generator, theta[it->param_id], policy,
                        result.dropped_weight, result.dropped_frequency);

  for (auto& [p, t] : terms) result.terms.emplace(p, t);
  return result;
}

double expectation_from_state(const PropagatedOperator& op, const StateVector& sv) {
  if (sv.size() != (size_t{1} << op.n))
    throw std::invalid_argument("expectation_from_state: dimension mismatch");
  double acc = 0;
  for (const auto& [p, t] : op.terms) acc += t.coeff * exact_expectation(sv, p);
  return acc;
}

void dump_propagated(const PropagatedOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_propagated: cannot open " + path);
  out << "pauli,coefficient,frequency\n";
  out.precision(17);
  for (const auto& [p, t] : op.terms)
    out << p.to_text() << "," << t.coeff << "," << t.frequency << "\n";
}

}  // namespace lowpp
