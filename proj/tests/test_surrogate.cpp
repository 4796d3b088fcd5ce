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

#include "lowpp/circuit.hpp"
#include "lowpp/propagation.hpp"
#include "lowpp/rng.hpp"
#include "lowpp/surrogate.hpp"

using namespace lowpp;

namespace {

using FeatureRow = std::unordered_map<PauliString, double, PauliStringHash>;

Circuit single_rz() {
  Circuit c;
  c.n = 1;
  c.gates = {{PauliString::from_text("Z"), 0}};
  c.n_params = 1;
  return c;
}

PauliSum obs(const std::string& text) {
  PauliSum s;
  s.add(PauliString::from_text(text), 1.0);
  return s;
}

std::vector<double> random_angles(uint32_t count, Rng& rng) {
  std::vector<double> theta(count);
  for (auto& t : theta) t = rng.uniform(-M_PI, M_PI);
  return theta;
}

FeatureRow feature_row_from_state(const SurrogateGraph& g, const StateVector& psi) {
  FeatureRow row;
  for (const auto& leaf : g.leaves) row[leaf.pauli] = exact_expectation(psi, leaf.pauli);
  return row;
}

}  // namespace

TEST_CASE("single Rz on X: two leaves, correct trig mix") {
  auto g = surrogate_build(single_rz(), obs("X"), TruncationPolicy{});
  REQUIRE(g.leaves.size() == 2);
  CHECK(g.n_roots == 1);
  CHECK(g.nodes.size() == 3);  // root + cos node + sin node

  auto active = all_leaves(g);
  FeatureRow row{{PauliString::from_text("X"), 0.3}, {PauliString::from_text("Y"), 0.4}};
  CHECK(surrogate_evaluate(g, active, {M_PI / 2}, row) == doctest::Approx(0.4));
  CHECK(surrogate_evaluate(g, active, {0.0}, row) == doctest::Approx(0.3));

  auto grad = surrogate_gradient(g, active, {0.0}, row);
  REQUIRE(grad.size() == 1);
  CHECK(grad[0] == doctest::Approx(0.4));  // d/dt (0.3 cos t + 0.4 sin t) at 0
}

TEST_CASE("single Rz on Z: one pass-through leaf, zero gradient") {
  auto g = surrogate_build(single_rz(), obs("Z"), TruncationPolicy{});
  REQUIRE(g.leaves.size() == 1);
  CHECK(g.nodes.size() == 1);  // just the root; pass-through allocates nothing
  CHECK(g.leaves[0].node == 0);
  CHECK(g.leaves[0].frequency == 0);

  auto active = all_leaves(g);
  FeatureRow row{{PauliString::from_text("Z"), 0.7}};
  CHECK(surrogate_evaluate(g, active, {1.1}, row) == doctest::Approx(0.7));
  auto grad = surrogate_gradient(g, active, {1.1}, row);
  CHECK(grad[0] == 0.0);
}

TEST_CASE("graph evaluation reproduces direct propagation term for term") {
  Rng rng(101);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kNonCrossing);
  auto zobs = readout_observables(layout, Task::kBinary)[0];
  PauliSum o;
  o.add(zobs, 1.0);

  for (uint32_t k : {2u, 3u, kUnlimited}) {
    TruncationPolicy policy;
    policy.max_weight = k;
    auto g = surrogate_build(circ, o, policy);
    auto active = all_leaves(g);
    auto theta = random_angles(circ.n_params, rng);
    auto values = surrogate_forward(g, active, theta);
    auto direct = propagate(circ, o, theta, policy);

    CHECK(g.dropped_weight == direct.dropped_weight);
    REQUIRE(g.leaves.size() == direct.terms.size());
    for (const auto& leaf : g.leaves) {
      auto it = direct.terms.find(leaf.pauli);
      REQUIRE(it != direct.terms.end());
      CHECK(values[leaf.node] == doctest::Approx(it->second.coeff).epsilon(1e-12));
      CHECK(leaf.frequency == it->second.frequency);
    }
  }
}

TEST_CASE("frequency truncation applied during build") {
  Rng rng(107);
  auto [circ, layout] = build_qcnn(6, LayoutStyle::kBrick);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 2;
  policy.max_frequency = 10;
  auto g = surrogate_build(circ, obs("ZIIIII"), policy);
  auto theta = random_angles(circ.n_params, rng);
  auto direct = propagate(circ, obs("ZIIIII"), theta, policy);
  auto values = surrogate_forward(g, all_leaves(g), theta);
  REQUIRE(g.leaves.size() == direct.terms.size());
  for (const auto& leaf : g.leaves) {
    CHECK(leaf.frequency <= 10);
    CHECK(values[leaf.node] ==
          doctest::Approx(direct.terms.at(leaf.pauli).coeff).epsilon(1e-12));
  }
}

TEST_CASE("evaluate equals propagate dotted with state expectations") {
  Rng rng(113);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kBrick);
  auto zobs = readout_observables(layout, Task::kBinary)[0];
  PauliSum o;
  o.add(zobs, 1.0);
  TruncationPolicy policy;
  policy.max_weight = 3;
  auto g = surrogate_build(circ, o, policy);
  auto active = all_leaves(g);
  for (int trial = 0; trial < 3; ++trial) {
    auto theta = random_angles(circ.n_params, rng);
    auto psi = random_product_state(8, rng);
    auto row = feature_row_from_state(g, psi);
    double via_graph = surrogate_evaluate(g, active, theta, row);
    double via_direct = expectation_from_state(propagate(circ, o, theta, policy), psi);
    CHECK(via_graph == doctest::Approx(via_direct).epsilon(1e-10));
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(127);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kNonCrossing);
  auto zobs = readout_observables(layout, Task::kBinary)[0];
  PauliSum o;
  o.add(zobs, 1.0);
  TruncationPolicy policy;
  policy.max_weight = 2;
  auto g = surrogate_build(circ, o, policy);
  auto active = all_leaves(g);
  auto psi = random_product_state(8, rng);
  auto row = feature_row_from_state(g, psi);

  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    auto theta = random_angles(circ.n_params, rng);
    auto grad = surrogate_gradient(g, active, theta, row);
    // Spot-check a handful of coordinates per draw to keep runtime sane.
    for (int probe = 0; probe < 6; ++probe) {
      size_t i = rng.uniform_index(theta.size());
      auto tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      double fd = (surrogate_evaluate(g, active, tp, row) -
                   surrogate_evaluate(g, active, tm, row)) /
                  (2 * h);
      double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      CHECK(std::abs(grad[i] - fd) / scale < 1e-5);
    }
  }
}

TEST_CASE("active-subset evaluation restricts the sum") {
  auto g = surrogate_build(single_rz(), obs("X"), TruncationPolicy{});
  FeatureRow row{{PauliString::from_text("X"), 0.3}, {PauliString::from_text("Y"), 0.4}};
  // Keep only the Y leaf.
  ActiveSet only_y;
  for (uint32_t li = 0; li < g.leaves.size(); ++li)
    if (g.leaves[li].pauli == PauliString::from_text("Y")) only_y.leaf_indices.push_back(li);
  only_y.eval_order.clear();
  for (uint32_t id = g.n_roots; id < g.nodes.size(); ++id) only_y.eval_order.push_back(id);
  double theta = 0.6;
  CHECK(surrogate_evaluate(g, only_y, {theta}, row) ==
        doctest::Approx(0.4 * std::sin(theta)));
}

TEST_CASE("variance-based leaf selection") {
  Rng rng(131);
  auto [circ, layout] = build_qcnn(4, LayoutStyle::kNonCrossing);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 2;
  auto g = surrogate_build(circ, obs("ZIII"), policy);

  // Synthetic features: one designated column has a large between-class
  // gap; all others carry small noise.
  PauliString hot = g.leaves.front().pauli;
  FeatureTable table;
  for (const auto& leaf : g.leaves) table.ops.push_back(leaf.pauli);
  for (int s = 0; s < 40; ++s) {
    table.state_ids.push_back("s" + std::to_string(s));
    table.labels.push_back(s % 2);
    std::vector<double> row;
    for (const auto& p : table.ops) {
      if (p == hot)
        row.push_back((s % 2 ? 1.0 : -1.0) + 0.01 * rng.normal());
      else
        row.push_back(0.1 * rng.normal());
    }
    table.rows.push_back(std::move(row));
  }

  auto top1 = select_active(g, table, 1);
  REQUIRE(top1.leaf_indices.size() == 1);
  CHECK(g.leaves[top1.leaf_indices[0]].pauli == hot);
  CHECK_FALSE(top1.truncated);

  auto all = select_active(g, table, g.leaves.size() + 5);
  CHECK(all.truncated);
  CHECK(all.leaf_indices.size() == g.leaves.size());

  // Constant (zero-variance) column ranks last.
  for (auto& row : table.rows) row[0] = 0.5;
  auto ranked = select_active(g, table, g.leaves.size());
  CHECK(ranked.leaf_indices.back() == 0);
}

TEST_CASE("window filter keeps only leaves with contiguous narrow support") {
  Rng rng(137);
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kNonCrossing);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 2;
  auto g = surrogate_build(circ, obs("ZIIIIIII"), policy);
  FeatureTable table;
  for (const auto& leaf : g.leaves) table.ops.push_back(leaf.pauli);
  for (int s = 0; s < 10; ++s) {
    table.state_ids.push_back("s" + std::to_string(s));
    table.labels.push_back(0);
    std::vector<double> row;
    for (size_t j = 0; j < table.ops.size(); ++j) row.push_back(rng.normal());
    table.rows.push_back(std::move(row));
  }
  const uint32_t w = 2;
  auto active = select_active(g, table, g.leaves.size(), w);
  CHECK(active.window == w);
  bool excluded_any = false;
  for (uint32_t li = 0; li < g.leaves.size(); ++li) {
    auto sup = g.leaves[li].pauli.support();
    uint32_t span = sup.empty() ? 0 : sup.back() - sup.front() + 1;
    bool kept = std::find(active.leaf_indices.begin(), active.leaf_indices.end(), li) !=
                active.leaf_indices.end();
    CHECK(kept == (span <= w));
    if (!kept) excluded_any = true;
  }
  CHECK(excluded_any);
}

TEST_CASE("build determinism and evaluation repeatability") {
  Rng rng(139);
  auto [circ, layout] = build_qcnn(6, LayoutStyle::kBrick);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 2;
  auto a = surrogate_build(circ, obs("ZIIIII"), policy);
  auto b = surrogate_build(circ, obs("ZIIIII"), policy);
  CHECK(a.nodes.size() == b.nodes.size());
  REQUIRE(a.leaves.size() == b.leaves.size());
  for (size_t i = 0; i < a.leaves.size(); ++i) {
    CHECK(a.leaves[i].pauli == b.leaves[i].pauli);
    CHECK(a.leaves[i].node == b.leaves[i].node);
  }

  auto theta = random_angles(circ.n_params, rng);
  auto psi = random_product_state(6, rng);
  auto row = feature_row_from_state(a, psi);
  auto active = all_leaves(a);
  double v1 = surrogate_evaluate(a, active, theta, row);
  double v2 = surrogate_evaluate(a, active, theta, row);
  CHECK(v1 == v2);  // bit identical
}

TEST_CASE("persistence round trip is bit exact") {
  Rng rng(149);
  auto [circ, layout] = build_qcnn(6, LayoutStyle::kNonCrossing);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 3;
  auto g = surrogate_build(circ, obs("ZIIIII"), policy);
  const std::string path = "test_surrogate_roundtrip.bin";
  save_surrogate(g, path);
  auto g2 = load_surrogate(path);
  std::remove(path.c_str());

  CHECK(g2.n == g.n);
  CHECK(g2.n_params == g.n_params);
  CHECK(g2.nodes.size() == g.nodes.size());
  REQUIRE(g2.leaves.size() == g.leaves.size());

  auto theta = random_angles(circ.n_params, rng);
  auto psi = random_product_state(6, rng);
  auto row = feature_row_from_state(g, psi);
  double v1 = surrogate_evaluate(g, all_leaves(g), theta, row);
  double v2 = surrogate_evaluate(g2, all_leaves(g2), theta, row);
  CHECK(v1 == v2);
}

TEST_CASE("node budget raises a resource error naming the count") {
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kBrick);
  (void)layout;
  TruncationPolicy policy;
  policy.max_weight = 3;
  CHECK_THROWS_WITH_AS(surrogate_build(circ, obs("ZIIIIIII"), policy, 10),
                       doctest::Contains("node budget"), std::runtime_error);
}

TEST_CASE("min_coeff pruning is rejected at build time") {
  TruncationPolicy policy;
  policy.min_coeff = 1e-8;
  CHECK_THROWS_AS(surrogate_build(single_rz(), obs("X"), policy), std::invalid_argument);
}
