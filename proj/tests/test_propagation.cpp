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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lowpp/circuit.hpp"
#include "lowpp/propagation.hpp"
#include "lowpp/rng.hpp"
#include "lowpp/statevector.hpp"

using namespace lowpp;

namespace {

TruncationPolicy unlimited() { return TruncationPolicy{}; }

PauliSum single_obs(const std::string& text) {
  PauliSum s;
  s.add(PauliString::from_text(text), 1.0);
  return s;
}

std::vector<double> random_angles(uint32_t count, Rng& rng) {
  std::vector<double> theta(count);
  for (auto& t : theta) t = rng.uniform(-M_PI, M_PI);
  return theta;
}

}  // namespace

TEST_CASE("Rz rotates X into Y with a +sin coefficient") {
  // Heisenberg rule for exp(i theta/2 Z): X -> cos X + sin Y, Z -> Z.
  Gate g{PauliString::from_text("Z"), 0};
  double theta = 0.37;
  auto branches =
      apply_rotation_heisenberg(PauliString::from_text("X"), {1.0, 0}, g, theta, unlimited());
  REQUIRE(branches.size() == 2);
  CHECK(branches[0].first.to_text() == "X");
  CHECK(branches[0].second.coeff == doctest::Approx(std::cos(theta)));
  CHECK(branches[0].second.frequency == 1);
  CHECK(branches[1].first.to_text() == "Y");
  CHECK(branches[1].second.coeff == doctest::Approx(std::sin(theta)));
  CHECK(branches[1].second.frequency == 1);

  auto pass =
      apply_rotation_heisenberg(PauliString::from_text("Z"), {0.5, 3}, g, theta, unlimited());
  REQUIRE(pass.size() == 1);
  CHECK(pass[0].first.to_text() == "Z");
  CHECK(pass[0].second.coeff == 0.5);
  CHECK(pass[0].second.frequency == 3);
}

TEST_CASE("XX rotation on Z1 splits with a -sin YX branch") {
  Gate g{PauliString::from_text("XX"), 0};
  double theta = 0.81;
  auto branches =
      apply_rotation_heisenberg(PauliString::from_text("ZI"), {1.0, 0}, g, theta, unlimited());
  REQUIRE(branches.size() == 2);
  CHECK(branches[0].first.to_text() == "ZI");
  CHECK(branches[0].second.coeff == doctest::Approx(std::cos(theta)));
  CHECK(branches[1].first.to_text() == "YX");
  CHECK(branches[1].second.coeff == doctest::Approx(-std::sin(theta)));
}

TEST_CASE("single-rotation rule matches the dense oracle") {
  // <psi| U^dag P U |psi> with U = exp(i theta/2 G) must equal the branch
  // expansion for every (G, P) pair that anticommutes.
  Rng rng(17);
  static const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const uint32_t n = 3;
  for (int trial = 0; trial < 200; ++trial) {
    PauliString gst(n), p(n);
    for (uint32_t q = 0; q < n; ++q) {
      gst.set(q, letters[rng.uniform_index(4)]);
      p.set(q, letters[rng.uniform_index(4)]);
    }
    if (gst.is_identity()) continue;
    Gate g{gst, 0};
    double theta = rng.uniform(-M_PI, M_PI);
    auto psi = random_product_state(n, rng);

    auto evolved = psi;
    apply_pauli_rotation(gst, theta, evolved);
    double want = exact_expectation(evolved, p);

    double got = 0;
    for (const auto& [q, t] :
         apply_rotation_heisenberg(p, {1.0, 0}, g, theta, unlimited()))
      got += t.coeff * exact_expectation(psi, q);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("full propagation equals statevector simulation, n=6 qcnn") {
  Rng rng(23);
  auto [circ, layout] = build_qcnn(6, LayoutStyle::kNonCrossing);
  auto theta = random_angles(circ.n_params, rng);
  for (const auto& obs : readout_observables(layout, Task::kFourClass)) {
    PauliSum o;
    o.add(obs, 1.0);
    auto prop = propagate(circ, o, theta, unlimited());
    CHECK(prop.dropped_weight == 0);
    CHECK(prop.dropped_frequency == 0);
    for (int trial = 0; trial < 3; ++trial) {
      auto psi = random_product_state(6, rng);
      auto evolved = psi;
      run_circuit(circ, theta, evolved);
      double want = exact_expectation(evolved, obs);
      double got = expectation_from_state(prop, psi);
      CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("full propagation equals statevector simulation, n=8 brick") {
  Rng rng(29);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kBrick);
  auto theta = random_angles(circ.n_params, rng);
  auto obs = readout_observables(layout, Task::kBinary)[0];
  PauliSum o;
  o.add(obs, 1.0);
  auto prop = propagate(circ, o, theta, unlimited());
  auto psi = random_product_state(8, rng);
  auto evolved = psi;
  run_circuit(circ, theta, evolved);
  CHECK(expectation_from_state(prop, psi) ==
        doctest::Approx(exact_expectation(evolved, obs)).epsilon(1e-9));
}

TEST_CASE("propagation result is independent of intermediate merge order") {
  // Two different but Heisenberg-equivalent parameter assignments: running
  // the same circuit twice with the same theta must be bit-identical, and a
  // commuting prefix gate must not change anything.
  Rng rng(31);
  auto [circ, layout] = build_qcnn(6, LayoutStyle::kBrick);
  (void)layout;
  auto theta = random_angles(circ.n_params, rng);
  PauliSum o = single_obs("ZIIIII");
  auto a = propagate(circ, o, theta, unlimited());
  auto b = propagate(circ, o, theta, unlimited());
  REQUIRE(a.terms.size() == b.terms.size());
  auto ita = a.terms.begin();
  auto itb = b.terms.begin();
  for (; ita != a.terms.end(); ++ita, ++itb) {
    CHECK(ita->first == itb->first);
    CHECK(ita->second.coeff == itb->second.coeff);
    CHECK(ita->second.frequency == itb->second.frequency);
  }
}

TEST_CASE("weight cap drops only the offending sin branches") {
  // exp(i theta/2 XX) on Z1 creates a weight-2 string; with max_weight=1 the
  // sin branch must vanish and be counted as dropped.
  Circuit circ;
  circ.n = 2;
  circ.gates = {{PauliString::from_text("XX"), 0}};
  circ.n_params = 1;
  TruncationPolicy policy;
  policy.max_weight = 1;
  auto prop = propagate(circ, single_obs("ZI"), {0.3}, policy);
  REQUIRE(prop.terms.size() == 1);
  CHECK(prop.terms.begin()->first.to_text() == "ZI");
  CHECK(prop.terms.begin()->second.coeff == doctest::Approx(std::cos(0.3)));
  CHECK(prop.dropped_weight == 1);
}

TEST_CASE("frequency cap kills both branches of a split") {
  Circuit circ;
  circ.n = 1;
  circ.gates = {{PauliString::from_text("Z"), 0}, {PauliString::from_text("Z"), 1}};
  circ.n_params = 2;
  TruncationPolicy policy;
  policy.max_frequency = 1;
  auto prop = propagate(circ, single_obs("X"), {0.2, 0.4}, policy);
  // First (reverse-order) rotation takes X to frequency 1; the second split
  // would reach frequency 2 and is dropped entirely.
  CHECK(prop.terms.empty());
  CHECK(prop.dropped_frequency >= 1);
}

TEST_CASE("merged paths keep the minimum frequency plus one") {
  // Rz then Rz on X: reverse order applies the second rotation first. Both
  // rotations anticommute with X and Y, so X and Y keep exchanging; all
  // terms have frequency 2 after two splits, and the net rotation angle is
  // the sum of the two angles.
  Circuit circ;
  circ.n = 1;
  circ.gates = {{PauliString::from_text("Z"), 0}, {PauliString::from_text("Z"), 1}};
  circ.n_params = 2;
  auto prop = propagate(circ, single_obs("X"), {0.2, 0.4}, unlimited());
  REQUIRE(prop.terms.size() == 2);
  CHECK(prop.terms.at(PauliString::from_text("X")).coeff ==
        doctest::Approx(std::cos(0.6)));
  CHECK(prop.terms.at(PauliString::from_text("Y")).coeff ==
        doctest::Approx(std::sin(0.6)));
  for (const auto& [p, t] : prop.terms) CHECK(t.frequency == 2);
}

TEST_CASE("squared norm never grows under truncation") {
  Rng rng(37);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kNonCrossing);
  (void)layout;
  auto theta = random_angles(circ.n_params, rng);
  PauliSum o = single_obs("ZIIIIIII");
  auto full = propagate(circ, o, theta, unlimited());
  CHECK(full.squared_norm() == doctest::Approx(1.0).epsilon(1e-9));
  double prev = 2.0;
  for (uint32_t k : {4u, 3u, 2u, 1u}) {
    TruncationPolicy policy;
    policy.max_weight = k;
    double norm = propagate(circ, o, theta, policy).squared_norm();
    CHECK(norm <= prev + 1e-12);
    CHECK(norm <= 1.0 + 1e-12);
    prev = norm;
  }
}

TEST_CASE("min_coeff prune removes tiny branches") {
  Circuit circ;
  circ.n = 1;
  circ.gates = {{PauliString::from_text("Z"), 0}};
  circ.n_params = 1;
  TruncationPolicy policy;
  policy.min_coeff = 1e-3;
  auto prop = propagate(circ, single_obs("X"), {1e-5}, policy);
  REQUIRE(prop.terms.size() == 1);  // sin branch ~1e-5 pruned
  CHECK(prop.terms.begin()->first.to_text() == "X");
}

TEST_CASE("csv dump lists every term") {
  Circuit circ;
  circ.n = 2;
  circ.gates = {{PauliString::from_text("XX"), 0}};
  circ.n_params = 1;
  auto prop = propagate(circ, single_obs("ZI"), {0.3}, TruncationPolicy{});
  const std::string path = "test_prop_dump.csv";
  dump_propagated(prop, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "pauli,coefficient,frequency");
  size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  in.close();
  std::remove(path.c_str());
  CHECK(rows == prop.terms.size());
}
