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

#include "lowpp/circuit.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lowpp {

std::vector<Gate> decompose_two_qubit_block(uint32_t n, uint32_t q1, uint32_t q2,
                                            uint32_t base_param_id) {
  if (q1 == q2) throw std::invalid_argument("two-qubit block: q1 == q2");
  std::vector<Gate> gates;
  gates.reserve(15);
  uint32_t pid = base_param_id;
  auto rot1 = [&](uint32_t q, char letter) {
    gates.push_back({PauliString::single(n, q, letter), pid++});
  };
  auto rot2 = [&](char letter) {
    PauliString g(n);
    g.set(q1, letter);
    g.set(q2, letter);
    gates.push_back({std::move(g), pid++});
  };
  rot1(q1, 'Z'); rot1(q1, 'Y'); rot1(q1, 'Z');
  rot1(q2, 'Z'); rot1(q2, 'Y'); rot1(q2, 'Z');
  rot2('X'); rot2('Y'); rot2('Z');
  rot1(q1, 'Z'); rot1(q1, 'Y'); rot1(q1, 'Z');
  rot1(q2, 'Z'); rot1(q2, 'Y'); rot1(q2, 'Z');
  return gates;
}

std::pair<Circuit, QcnnLayout> build_qcnn(uint32_t n, LayoutStyle style) {
  if (n < 2) throw std::invalid_argument("build_qcnn: need n >= 2");
  Circuit circ;
  circ.n = n;
  QcnnLayout layout;
  layout.n = n;

  std::vector<uint32_t> survivors(n);
  for (uint32_t q = 0; q < n; ++q) survivors[q] = q;
  layout.survivors.push_back(survivors);

  uint32_t pid = 0;
  auto add_block = [&](uint32_t a, uint32_t b,
                       std::vector<std::pair<uint32_t, uint32_t>>& layer) {
    auto gates = decompose_two_qubit_block(n, a, b, pid);
    pid += 15;
    circ.gates.insert(circ.gates.end(), gates.begin(), gates.end());
    layer.emplace_back(a, b);
  };

  while (survivors.size() >= 2) {
    size_t m = survivors.size();
    if (m == 2) layout.readout_qubits = survivors;
    std::vector<std::pair<uint32_t, uint32_t>> layer;
    for (size_t i = 0; i + 1 < m; i += 2) add_block(survivors[i], survivors[i + 1], layer);
    if (style == LayoutStyle::kBrick && m > 2) {
      for (size_t i = 1; i + 1 < m; i += 2) add_block(survivors[i], survivors[i + 1], layer);
    }
    layout.layers.push_back(std::move(layer));
    // Pooling: keep every second survivor (odd one passes through unpaired).
    std::vector<uint32_t> kept;
    for (size_t i = 0; i < m; i += 2) kept.push_back(survivors[i]);
    survivors = std::move(kept);
    layout.survivors.push_back(survivors);
  }
  circ.n_params = pid;
  return {std::move(circ), std::move(layout)};
}

std::vector<PauliString> readout_observables(const QcnnLayout& layout, Task task) {
  std::vector<PauliString> obs;
  if (task == Task::kBinary) {
    if (layout.readout_qubits.empty())
      throw std::invalid_argument("readout_observables: layout has no readout qubits");
    obs.push_back(PauliString::single(layout.n, layout.readout_qubits.front(), 'Z'));
    return obs;
  }
  if (layout.readout_qubits.size() < 2)
    throw std::invalid_argument("readout_observables: four-class task needs two readout qubits");
  uint32_t a = layout.readout_qubits[0];
  uint32_t b = layout.readout_qubits[1];
  obs.push_back(PauliString::single(layout.n, a, 'Z'));
  obs.push_back(PauliString::single(layout.n, b, 'Z'));
  PauliString zz(layout.n);
  zz.set(a, 'Z');
  zz.set(b, 'Z');
  obs.push_back(std::move(zz));
  return obs;
}

void save_circuit(const Circuit& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_circuit: cannot open " + path);
  out << "n " << c.n << " params " << c.n_params << "\n";
  for (const auto& g : c.gates) out << g.generator.to_text() << " " << g.param_id << "\n";
}

Circuit load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_circuit: cannot open " + path);
  Circuit c;
  std::string tag1, tag2;
  if (!(in >> tag1 >> c.n >> tag2 >> c.n_params) || tag1 != "n" || tag2 != "params")
    throw std::runtime_error("load_circuit: bad header in " + path);
  std::string pauli;
  uint32_t pid;
  while (in >> pauli >> pid) {
    if (pauli.size() != c.n) throw std::runtime_error("load_circuit: gate length mismatch");
    c.gates.push_back({PauliString::from_text(pauli), pid});
  }
  return c;
}

void save_layout(const QcnnLayout& l, const std::string& path) {
  nlohmann::json j;
  j["n"] = l.n;
  j["layers"] = l.layers;
  j["survivors"] = l.survivors;
  j["readout_qubits"] = l.readout_qubits;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_layout: cannot open " + path);
  out << j.dump(2) << "\n";
}

QcnnLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_layout: cannot open " + path);
  nlohmann::json j;
  in >> j;
  QcnnLayout l;
  l.n = j.at("n").get<uint32_t>();
  l.layers = j.at("layers").get<decltype(l.layers)>();
  l.survivors = j.at("survivors").get<decltype(l.survivors)>();
  l.readout_qubits = j.at("readout_qubits").get<decltype(l.readout_qubits)>();
  return l;
}

}  // namespace lowpp
