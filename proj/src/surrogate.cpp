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

#include "lowpp/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lowpp {

namespace {

inline int sin_sign(int phase_power) { return phase_power == 1 ? 1 : -1; }

struct BuildEntry {
  int32_t node;
  uint32_t frequency;
};

using BuildMap = std::unordered_map<PauliString, BuildEntry, PauliStringHash>;

void check_budget(const SurrogateGraph& g, size_t max_nodes) {
  if (g.nodes.size() > max_nodes)
    throw std::runtime_error("surrogate_build: node budget exceeded at " +
                             std::to_string(g.nodes.size()) + " nodes");
}

}  // namespace

SurrogateGraph surrogate_build(const Circuit& circuit, const PauliSum& observable,
                               const TruncationPolicy& policy, size_t max_nodes) {
  if (policy.min_coeff != 0.0)
    throw std::invalid_argument(
        "surrogate_build: min_coeff pruning is theta-dependent; use 0");
  SurrogateGraph g;
  g.n = circuit.n;
  g.n_params = circuit.n_params;

  BuildMap terms;
  for (const auto& [p, coeff] : observable) {
    if (p.num_qubits() != circuit.n)
      throw std::invalid_argument("surrogate_build: observable qubit count mismatch");
    if (p.weight() > policy.max_weight) {
      ++g.dropped_weight;
      continue;
    }
    int32_t id = static_cast<int32_t>(g.nodes.size());
    g.nodes.push_back({});
    g.root_values.push_back(coeff);
    terms[p] = {id, 0};
  }
  g.n_roots = static_cast<uint32_t>(g.nodes.size());

  struct Snap {
    PauliString pauli;
    BuildEntry entry;
  };
  std::vector<Snap> snapshot;
  std::unordered_map<PauliString, size_t, PauliStringHash> index;

  for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
    const PauliString& generator = it->generator;
    const uint32_t pid = it->param_id;

    snapshot.clear();
    for (const auto& [p, e] : terms)
      if (!p.commutes_with(generator)) snapshot.push_back({p, e});
    if (snapshot.empty()) continue;
    index.clear();
    for (size_t i = 0; i < snapshot.size(); ++i) index.emplace(snapshot[i].pauli, i);

    for (size_t i = 0; i < snapshot.size(); ++i) {
      const auto& [p, ep] = snapshot[i];
      auto prod = multiply(generator, p);
      PauliString q = std::move(prod.pauli);
      const int8_t sign = static_cast<int8_t>(sin_sign(prod.phase_power));

      auto jt = index.find(q);
      const bool partner_present = jt != index.end();
      if (partner_present && jt->second < i) continue;  // pair already processed

      const BuildEntry* eq = partner_present ? &snapshot[jt->second].entry : nullptr;
      uint32_t freq_new = (eq ? std::min(ep.frequency, eq->frequency) : ep.frequency) + 1;

      if (freq_new > policy.max_frequency) {
        g.dropped_frequency += partner_present ? 2 : 1;
        terms.erase(p);
        if (partner_present) terms.erase(q);
        continue;
      }

      // new value of P = cos * v[P] - sign * sin * v[Q]
      int32_t node_p = static_cast<int32_t>(g.nodes.size());
      g.nodes.push_back({ep.node, eq ? eq->node : -1, pid, static_cast<int8_t>(-sign)});
      terms[p] = {node_p, freq_new};

      if (q.weight() > policy.max_weight) {
        ++g.dropped_weight;  // sin branch beyond the bodyness cap
      } else {
        // new value of Q = cos * v[Q] + sign * sin * v[P]
        int32_t node_q = static_cast<int32_t>(g.nodes.size());
        g.nodes.push_back({eq ? eq->node : -1, ep.node, pid, sign});
        terms[q] = {node_q, freq_new};
      }
      check_budget(g, max_nodes);
    }
  }

  for (const auto& [p, e] : terms)
    g.leaves.push_back({p, static_cast<uint32_t>(e.node), e.frequency});
  std::sort(g.leaves.begin(), g.leaves.end(),
            [](const auto& a, const auto& b) { return a.pauli < b.pauli; });
  return g;
}

namespace {

std::vector<uint32_t> ancestor_order(const SurrogateGraph& g,
                                     const std::vector<uint32_t>& leaf_indices) {
  std::vector<uint8_t> needed(g.nodes.size(), 0);
  for (uint32_t li : leaf_indices) needed[g.leaves[li].node] = 1;
  for (size_t id = g.nodes.size(); id-- > g.n_roots;) {
    if (!needed[id]) continue;
    const auto& nd = g.nodes[id];
    if (nd.cos_parent >= 0) needed[nd.cos_parent] = 1;
    if (nd.sin_parent >= 0) needed[nd.sin_parent] = 1;
  }
  std::vector<uint32_t> order;
  for (size_t id = g.n_roots; id < g.nodes.size(); ++id)
    if (needed[id]) order.push_back(static_cast<uint32_t>(id));
  return order;
}

}  // namespace

ActiveSet all_leaves(const SurrogateGraph& graph) {
  ActiveSet a;
  a.leaf_indices.resize(graph.leaves.size());
  std::iota(a.leaf_indices.begin(), a.leaf_indices.end(), 0u);
  a.eval_order = ancestor_order(graph, a.leaf_indices);
  return a;
}

ActiveSet make_active(const SurrogateGraph& graph, std::vector<uint32_t> leaf_indices) {
  for (uint32_t li : leaf_indices)
    if (li >= graph.leaves.size())
      throw std::invalid_argument("make_active: leaf index out of range");
  ActiveSet a;
  a.leaf_indices = std::move(leaf_indices);
  a.eval_order = ancestor_order(graph, a.leaf_indices);
  return a;
}

ActiveSet select_active(const SurrogateGraph& graph, const FeatureTable& features, size_t M,
                        uint32_t window) {
  ActiveSet a;
  a.window = window;

  std::vector<std::pair<double, uint32_t>> ranked;  // (variance, leaf index)
  for (uint32_t li = 0; li < graph.leaves.size(); ++li) {
    const auto& leaf = graph.leaves[li];
    if (window > 0) {
      auto sup = leaf.pauli.support();
      if (!sup.empty() && sup.back() - sup.front() + 1 > window) continue;
    }
    int col = features.column_index(leaf.pauli);
    if (col < 0)
      throw std::invalid_argument("select_active: feature table lacks operator " +
                                  leaf.pauli.to_text());
    double mean = 0;
    for (const auto& row : features.rows) mean += row[col];
    mean /= static_cast<double>(features.rows.size());
    double var = 0;
    for (const auto& row : features.rows) {
      double d = row[col] - mean;
      var += d * d;
    }
    var /= static_cast<double>(features.rows.size());
    ranked.emplace_back(var, li);
  }

  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  if (M > ranked.size()) {
    a.truncated = true;
    M = ranked.size();
  }
  for (size_t i = 0; i < M; ++i) {
    a.scores.push_back(ranked[i].first);
    a.leaf_indices.push_back(ranked[i].second);
  }
  a.eval_order = ancestor_order(graph, a.leaf_indices);
  return a;
}

std::vector<double> surrogate_forward(const SurrogateGraph& graph, const ActiveSet& active,
                                      const std::vector<double>& theta) {
  if (theta.size() != graph.n_params)
    throw std::invalid_argument("surrogate_forward: parameter count mismatch");
  std::vector<double> c(theta.size()), s(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    c[i] = std::cos(theta[i]);
    s[i] = std::sin(theta[i]);
  }
  std::vector<double> values(graph.nodes.size());
  for (uint32_t r = 0; r < graph.n_roots; ++r) values[r] = graph.root_values[r];
  for (uint32_t id : active.eval_order) {
    const auto& nd = graph.nodes[id];
    double v = 0;
    if (nd.cos_parent >= 0) v += c[nd.param_id] * values[nd.cos_parent];
    if (nd.sin_parent >= 0) v += nd.sin_sign * s[nd.param_id] * values[nd.sin_parent];
    values[id] = v;
  }
  return values;
}

double surrogate_evaluate(
    const SurrogateGraph& graph, const ActiveSet& active, const std::vector<double>& theta,
    const std::unordered_map<PauliString, double, PauliStringHash>& feature_row) {
  auto values = surrogate_forward(graph, active, theta);
  double acc = 0;
  for (uint32_t li : active.leaf_indices) {
    const auto& leaf = graph.leaves[li];
    auto it = feature_row.find(leaf.pauli);
    if (it == feature_row.end())
      throw std::invalid_argument("surrogate_evaluate: missing feature for " +
                                  leaf.pauli.to_text());
    acc += it->second * values[leaf.node];
  }
  return acc;
}

std::vector<double> surrogate_backward(const SurrogateGraph& graph, const ActiveSet& active,
                                       const std::vector<double>& theta,
                                       const std::vector<double>& values,
                                       const std::vector<double>& leaf_adjoints) {
  if (leaf_adjoints.size() != active.leaf_indices.size())
    throw std::invalid_argument("surrogate_backward: adjoint count mismatch");
  std::vector<double> c(theta.size()), s(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    c[i] = std::cos(theta[i]);
    s[i] = std::sin(theta[i]);
  }
  std::vector<double> adj(graph.nodes.size(), 0.0);
  for (size_t i = 0; i < active.leaf_indices.size(); ++i)
    adj[graph.leaves[active.leaf_indices[i]].node] += leaf_adjoints[i];

  std::vector<double> grad(graph.n_params, 0.0);
  for (size_t k = active.eval_order.size(); k-- > 0;) {
    uint32_t id = active.eval_order[k];
    double a = adj[id];
    if (a == 0.0) continue;
    const auto& nd = graph.nodes[id];
    double dv = 0;
    if (nd.cos_parent >= 0) {
      dv -= s[nd.param_id] * values[nd.cos_parent];
      adj[nd.cos_parent] += a * c[nd.param_id];
    }
    if (nd.sin_parent >= 0) {
      dv += nd.sin_sign * c[nd.param_id] * values[nd.sin_parent];
      adj[nd.sin_parent] += a * nd.sin_sign * s[nd.param_id];
    }
    grad[nd.param_id] += a * dv;
  }
  return grad;
}

std::vector<double> surrogate_gradient(
    const SurrogateGraph& graph, const ActiveSet& active, const std::vector<double>& theta,
    const std::unordered_map<PauliString, double, PauliStringHash>& feature_row) {
  auto values = surrogate_forward(graph, active, theta);
  std::vector<double> leaf_adj;
  leaf_adj.reserve(active.leaf_indices.size());
  for (uint32_t li : active.leaf_indices) {
    auto it = feature_row.find(graph.leaves[li].pauli);
    if (it == feature_row.end())
      throw std::invalid_argument("surrogate_gradient: missing feature for " +
                                  graph.leaves[li].pauli.to_text());
    leaf_adj.push_back(it->second);
  }
  return surrogate_backward(graph, active, theta, values, leaf_adj);
}

namespace {

constexpr char kMagic[4] = {'L', 'P', 'S', 'G'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_surrogate(const SurrogateGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_surrogate: cannot open " + path);
  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, graph.n);
  write_raw(out, graph.n_params);
  write_raw(out, graph.n_roots);
  write_raw(out, static_cast<uint64_t>(graph.nodes.size()));
  write_raw(out, static_cast<uint64_t>(graph.leaves.size()));
  write_raw(out, graph.dropped_weight);
  write_raw(out, graph.dropped_frequency);
  for (double v : graph.root_values) write_raw(out, v);
  for (const auto& nd : graph.nodes) {
    write_raw(out, nd.cos_parent);
    write_raw(out, nd.sin_parent);
    write_raw(out, nd.param_id);
    write_raw(out, nd.sin_sign);
  }
  for (const auto& leaf : graph.leaves) {
    std::string text = leaf.pauli.to_text();
    write_raw(out, static_cast<uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_raw(out, leaf.node);
    write_raw(out, leaf.frequency);
  }
  if (!out) throw std::runtime_error("save_surrogate: write failed for " + path);
}

SurrogateGraph load_surrogate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_surrogate: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_surrogate: bad magic in " + path);
  uint32_t version;
  read_raw(in, version);
  if (version != kVersion)
    throw std::runtime_error("load_surrogate: unsupported version in " + path);
  SurrogateGraph g;
  uint64_t node_count, leaf_count;
  read_raw(in, g.n);
  read_raw(in, g.n_params);
  read_raw(in, g.n_roots);
  read_raw(in, node_count);
  read_raw(in, leaf_count);
  read_raw(in, g.dropped_weight);
  read_raw(in, g.dropped_frequency);
  g.root_values.resize(g.n_roots);
  for (auto& v : g.root_values) read_raw(in, v);
  g.nodes.resize(node_count);
  for (auto& nd : g.nodes) {
    read_raw(in, nd.cos_parent);
    read_raw(in, nd.sin_parent);
    read_raw(in, nd.param_id);
    read_raw(in, nd.sin_sign);
  }
  g.leaves.resize(leaf_count);
  for (auto& leaf : g.leaves) {
    uint32_t len;
    read_raw(in, len);
    std::string text(len, '?');
    in.read(text.data(), len);
    leaf.pauli = PauliString::from_text(text);
    read_raw(in, leaf.node);
    read_raw(in, leaf.frequency);
  }
  if (!in) throw std::runtime_error("load_surrogate: truncated file " + path);
  return g;
}

}  // namespace lowpp
