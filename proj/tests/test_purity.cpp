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

#include "lowpp/purity.hpp"

using namespace lowpp;

namespace {

double binom_d(uint32_t n, uint32_t k) {
  double r = 1;
  for (uint32_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

double total_purity(const PurityDistribution& d) {
  double s = 0;
  for (size_t k = 1; k < d.values.size(); ++k) s += d.values[k];
  return s;
}

}  // namespace

TEST_CASE("P-gate action on the pair basis") {
  IsState st;
  st["is"] = 1.0;
  auto out = pgate_apply(st, 0, 1);
  REQUIRE(out.size() == 2);
  CHECK(out["ii"] == doctest::Approx(0.4));
  CHECK(out["ss"] == doctest::Approx(0.4));

  IsState fixed;
  fixed["ii"] = 0.3;
  fixed["ss"] = 0.7;
  auto out2 = pgate_apply(fixed, 0, 1);
  CHECK(out2["ii"] == doctest::Approx(0.3));
  CHECK(out2["ss"] == doctest::Approx(0.7));

  IsState si;
  si["si"] = 1.0;
  auto out3 = pgate_apply(si, 0, 1);
  double mass = 0;
  for (const auto& [k, v] : out3) mass += v;
  CHECK(mass == doctest::Approx(0.8));  // leakage out of the tracked sector
}

TEST_CASE("two-qubit network gives the exact Haar values") {
  auto [circ, layout] = build_qcnn(2, LayoutStyle::kNonCrossing);
  (void)circ;
  auto dist = purities_network(layout, 0);
  CHECK(dist.values[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(dist.values[2] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(dist.values[0] == 0.0);
  CHECK(total_purity(dist) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("single-layer recursion matches the same values") {
  auto dist = purities_recursive(1);
  CHECK(dist.values[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(dist.values[2] == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("untouched observable is a delta at k=1") {
  QcnnLayout layout;
  layout.n = 3;
  auto dist = purities_network(layout, 1);
  CHECK(dist.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(total_purity(dist) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("recursion equals the non-crossing network up to rounding") {
  for (uint32_t L = 1; L <= 4; ++L) {
    auto [circ, layout] = build_qcnn(1u << L, LayoutStyle::kNonCrossing);
    (void)circ;
    REQUIRE(layout.readout_qubits.front() == 0);
    auto net = purities_network(layout, 0);
    auto rec = purities_recursive(L);
    REQUIRE(net.values.size() == rec.values.size());
    for (size_t k = 0; k < net.values.size(); ++k)
      CHECK(net.values[k] == doctest::Approx(rec.values[k]).epsilon(1e-12));
  }
}

TEST_CASE("conservation holds for the recursion up to L=7") {
  for (uint32_t L = 1; L <= 7; ++L)
    CHECK(total_purity(purities_recursive(L)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("conservation holds for brick layouts too") {
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kBrick);
  (void)circ;
  auto dist = purities_network(layout, 0);
  CHECK(total_purity(dist) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("deep-network purities decay exponentially in bodyness") {
  auto dist = purities_recursive(7);  // 128 qubits
  const uint32_t n = dist.n;
  // Per-Pauli contribution: p^(k) spread over the 3^k binom(n,k) strings.
  std::vector<double> logc(n + 1, 0.0);
  for (uint32_t k = 1; k <= n; ++k)
    if (dist.values[k] > 0)
      logc[k] = std::log10(dist.values[k]) - k * std::log10(3.0) -
                std::log10(binom_d(n, k));
  // At least one order of magnitude per unit k beyond k=2.
  for (uint32_t k = 3; k <= 14; ++k) CHECK(logc[k] <= logc[k - 1] - 1.0);
  // Log-linear fit over k in [2, 14] has slope < -1.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (uint32_t k = 2; k <= 14; ++k) {
    sx += k;
    sy += logc[k];
    sxx += static_cast<double>(k) * k;
    sxy += k * logc[k];
    cnt += 1;
  }
  double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  CHECK(slope < -1.0);
}

TEST_CASE("Monte-Carlo oracle brackets the analytic two-qubit values") {
  auto [circ, layout] = build_qcnn(2, LayoutStyle::kNonCrossing);
  (void)circ;
  auto mc = purities_mc(layout, 0, 10000, 7);
  CHECK(std::abs(mc.values[1] - 0.4) < 3 * mc.stderrs[1]);
  CHECK(std::abs(mc.values[2] - 0.6) < 3 * mc.stderrs[2]);
  CHECK(total_purity(mc) == doctest::Approx(1.0).epsilon(1e-10));  // per-sample exact
}

TEST_CASE("Monte-Carlo with no blocks is an exact delta") {
  QcnnLayout layout;
  layout.n = 2;
  auto mc = purities_mc(layout, 1, 50, 3);
  CHECK(mc.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mc.stderrs[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("network and Monte-Carlo agree at n=8") {
  auto [circ, layout] = build_qcnn(8, LayoutStyle::kNonCrossing);
  (void)circ;
  auto net = purities_network(layout, 0);
  auto mc = purities_mc(layout, 0, 500, 11);
  for (uint32_t k = 1; k <= 8; ++k) {
    double tol = 3.5 * mc.stderrs[k] + 1e-12;
    CHECK(std::abs(net.values[k] - mc.values[k]) < tol);
  }
}

TEST_CASE("purity CSV output") {
  auto dist = purities_recursive(2);
  const std::string path = "test_purity.csv";
  save_purities(dist, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,value,stderr,method");
  size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  in.close();
  std::remove(path.c_str());
  CHECK(rows == dist.values.size());
}
