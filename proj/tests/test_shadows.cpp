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

#include "lowpp/rng.hpp"
#include "lowpp/shadows.hpp"
#include "lowpp/statevector.hpp"

using namespace lowpp;

TEST_CASE("Z-basis outcomes on the all-zero state are deterministic") {
  auto set = sample_shadows(zero_state(4), 4, 200, 1);
  for (const auto& rec : set.records)
    for (uint32_t q = 0; q < 4; ++q)
      if (rec.basis[q] == 2) CHECK(rec.outcomes[q] == 0);
}

TEST_CASE("plus state: X outcomes fixed, Z outcomes unbiased") {
  // |+>^3 via a uniform superposition.
  uint32_t n = 3;
  StateVector psi(size_t{1} << n, 1.0 / std::sqrt(8.0));
  auto set = sample_shadows(psi, n, 10000, 2);
  size_t z_count = 0, z_ones = 0;
  for (const auto& rec : set.records) {
    for (uint32_t q = 0; q < n; ++q) {
      if (rec.basis[q] == 0) CHECK(rec.outcomes[q] == 0);  // X eigenvalue +1
      if (rec.basis[q] == 2) {
        ++z_count;
        z_ones += rec.outcomes[q];
      }
    }
  }
  // Binomial 3 sigma around one half.
  double frac = static_cast<double>(z_ones) / static_cast<double>(z_count);
  CHECK(std::abs(frac - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(z_count)));
}

TEST_CASE("fixed seed gives a bit-identical shadow set") {
  Rng rng(5);
  auto psi = random_product_state(3, rng);
  auto a = sample_shadows(psi, 3, 100, 77);
  auto b = sample_shadows(psi, 3, 100, 77);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t r = 0; r < a.records.size(); ++r) {
    CHECK(a.records[r].basis == b.records[r].basis);
    CHECK(a.records[r].outcomes == b.records[r].outcomes);
  }
}

TEST_CASE("estimate arithmetic on hand-built records") {
  ShadowSet set;
  set.n = 1;
  set.records = {{{2}, {0}}, {{0}, {0}}, {{2}, {1}}};  // (Z,+1) (X,+1) (Z,-1)
  CHECK(estimate(set, PauliString::from_text("Z")) == doctest::Approx(0.0));
  CHECK(estimate(set, PauliString::from_text("X")) == doctest::Approx(1.0));
}

TEST_CASE("estimate converges to the exact expectation") {
  auto set = sample_shadows(zero_state(5), 5, 10000, 3);
  double est = estimate(set, PauliString::single(5, 1, 'Z'));
  CHECK(std::abs(est - 1.0) < 0.09);  // 3*sqrt(9/S)
}

TEST_CASE("Y-basis sign convention matches the dense oracle") {
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    auto psi = random_product_state(2, rng);
    auto set = sample_shadows(psi, 2, 30000, 100 + trial);
    for (char letter : {'X', 'Y', 'Z'}) {
      auto p = PauliString::single(2, 0, letter);
      double sigma = std::sqrt(3.0 / 30000.0);
      CHECK(std::abs(estimate(set, p) - exact_expectation(psi, p)) < 4 * sigma);
    }
  }
}

TEST_CASE("weight-2 estimate on a random 4-qubit state") {
  Rng rng(13);
  auto psi = random_product_state(4, rng);
  auto set = sample_shadows(psi, 4, 100000, 21);
  PauliString p(4);
  p.set(1, 'X');
  p.set(3, 'Z');
  double est = estimate(set, p);
  CHECK(std::abs(est - exact_expectation(psi, p)) < 3 * std::sqrt(9.0 / 100000.0));
}

TEST_CASE("unbiasedness over independent sets") {
  Rng rng(17);
  auto psi = random_product_state(3, rng);
  PauliString p(3);
  p.set(0, 'Y');
  p.set(2, 'Z');
  double mean = 0;
  const int reps = 200;
  std::vector<double> vals;
  for (int r = 0; r < reps; ++r) {
    vals.push_back(estimate(sample_shadows(psi, 3, 100, 1000 + r), p));
    mean += vals.back();
  }
  mean /= reps;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (reps - 1);
  double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - exact_expectation(psi, p)) < 3 * se);
}

TEST_CASE("estimator variance scales like 1/S") {
  Rng rng(19);
  auto psi = random_product_state(2, rng);
  PauliString p(2);
  p.set(0, 'Z');
  p.set(1, 'X');
  std::vector<double> logS, logV;
  uint64_t seed = 5000;
  for (size_t S : {size_t{100}, size_t{1000}, size_t{10000}}) {
    const int reps = 60;
    std::vector<double> vals;
    double mean = 0;
    for (int r = 0; r < reps; ++r) {
      vals.push_back(estimate(sample_shadows(psi, 2, S, seed++), p));
      mean += vals.back();
    }
    mean /= reps;
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (reps - 1);
    logS.push_back(std::log(static_cast<double>(S)));
    logV.push_back(std::log(var));
  }
  // Least-squares slope of log(var) against log(S).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < logS.size(); ++i) {
    sx += logS[i];
    sy += logV[i];
    sxx += logS[i] * logS[i];
    sxy += logS[i] * logV[i];
  }
  double k = static_cast<double>(logS.size());
  double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  CHECK(slope > -1.2);
  CHECK(slope < -0.8);
}

TEST_CASE("no basis match anywhere gives exactly zero") {
  ShadowSet set;
  set.n = 2;
  for (int r = 0; r < 50; ++r) set.records.push_back({{0, 0}, {0, 1}});  // all X
  CHECK(estimate(set, PauliString::from_text("ZI")) == 0.0);
  CHECK(estimate(set, PauliString::from_text("IZ")) == 0.0);
}

TEST_CASE("median of means tolerates a corrupted block") {
  auto set = sample_shadows(zero_state(3), 3, 9000, 23);
  // Corrupt the first third: flip every Z outcome on qubit 0.
  for (size_t r = 0; r < 3000; ++r)
    if (set.records[r].basis[0] == 2) set.records[r].outcomes[0] = 1;
  auto p = PauliString::single(3, 0, 'Z');
  double mom = estimate_median_of_means(set, p, 9);
  CHECK(mom == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("shadow file round trip") {
  Rng rng(29);
  auto psi = random_product_state(3, rng);
  auto set = sample_shadows(psi, 3, 50, 31);
  set.state_id = "grid_004";
  set.label = 2;
  const std::string path = "test_shadow_roundtrip.txt";
  save_shadows(set, path);
  auto loaded = load_shadows(path);
  std::remove(path.c_str());
  CHECK(loaded.n == set.n);
  CHECK(loaded.state_id == set.state_id);
  CHECK(loaded.label == set.label);
  CHECK(loaded.seed == set.seed);
  REQUIRE(loaded.records.size() == set.records.size());
  for (size_t r = 0; r < set.records.size(); ++r) {
    CHECK(loaded.records[r].basis == set.records[r].basis);
    CHECK(loaded.records[r].outcomes == set.records[r].outcomes);
  }
}

TEST_CASE("feature table from shadows and exact mode") {
  Rng rng(37);
  auto psi = random_product_state(3, rng);
  auto set = sample_shadows(psi, 3, 500, 41);
  set.state_id = "s0";
  set.label = 1;
  std::vector<PauliString> ops = {PauliString::single(3, 1, 'Z')};
  auto table = build_feature_table({set}, ops);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][0] == doctest::Approx(estimate(set, ops[0])));
  CHECK(table.labels[0] == 1);
  CHECK(table.column_index(ops[0]) == 0);
  CHECK(table.column_index(PauliString::single(3, 0, 'X')) == -1);

  auto exact = build_feature_table_exact({psi}, {"s0"}, {1}, ops);
  CHECK(exact.rows[0][0] == doctest::Approx(exact_expectation(psi, ops[0])).epsilon(1e-12));
}

TEST_CASE("feature table CSV round trip") {
  Rng rng(43);
  std::vector<StateVector> states = {random_product_state(3, rng), random_product_state(3, rng)};
  std::vector<PauliString> ops = {PauliString::single(3, 0, 'Z'),
                                  PauliString::from_text("XIY")};
  auto table = build_feature_table_exact(states, {"a", "b"}, {0, 1}, ops);
  const std::string path = "test_features_roundtrip.csv";
  save_feature_table(table, path);
  auto loaded = load_feature_table(path);
  std::remove(path.c_str());
  CHECK(loaded.state_ids == table.state_ids);
  CHECK(loaded.labels == table.labels);
  REQUIRE(loaded.ops.size() == table.ops.size());
  for (size_t j = 0; j < loaded.ops.size(); ++j) CHECK(loaded.ops[j] == table.ops[j]);
  for (size_t s = 0; s < table.rows.size(); ++s)
    for (size_t j = 0; j < table.rows[s].size(); ++j)
      CHECK(loaded.rows[s][j] == doctest::Approx(table.rows[s][j]).epsilon(1e-15));
}

TEST_CASE("estimate input validation") {
  ShadowSet empty;
  empty.n = 1;
  CHECK_THROWS(estimate(empty, PauliString::from_text("Z")));
  auto set = sample_shadows(zero_state(1), 1, 10, 3);
  CHECK_THROWS(estimate(set, PauliString::from_text("I")));
}
