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

#include "lowpp/purity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>

#include "lowpp/rng.hpp"

namespace lowpp {

namespace {

constexpr double kA = 2.0 / 5.0;  // P-gate off-diagonal entry

// Pascal-triangle binomial table, shared by the recursion and the network
// conversion so the two methods agree to rounding.
const double* binomial_row(uint32_t n) {
  static std::vector<std::vector<double>> rows;
  while (rows.size() <= n) {
    size_t r = rows.size();
    std::vector<double> row(r + 1, 1.0);
    for (size_t c = 1; c < r; ++c) row[c] = rows[r - 1][c - 1] + rows[r - 1][c];
    rows.push_back(std::move(row));
  }
  return rows[n].data();
}

inline double binom(uint32_t n, uint32_t k) {
  return k <= n ? binomial_row(n)[k] : 0.0;
}

// Converts a final {i,s} string amplitude to its per-k purity
// contributions: sigma s-sites split into k Pauli sites (weight 3/2 each)
// and sigma-k identity sites (weight 1/2 each), binom(sigma,k) ways.
void accumulate_split(std::vector<double>& p, double amp, uint32_t sigma) {
  for (uint32_t k = 1; k <= sigma; ++k)
    p[k] += amp * binom(sigma, k) * std::pow(1.5, k) * std::pow(0.5, sigma - k);
}

}  // namespace

IsState pgate_apply(const IsState& state, uint32_t q1, uint32_t q2) {
  IsState out;
  for (const auto& [str, amp] : state) {
    if (q1 >= str.size() || q2 >= str.size() || q1 == q2)
      throw std::invalid_argument("pgate_apply: bad qubit pair");
    char a = str[q1], b = str[q2];
    if (a == b) {
      out[str] += amp;  // |ii> and |ss> are fixed points
    } else {
      std::string both = str;
      both[q1] = both[q2] = 'i';
      out[both] += kA * amp;
      both[q1] = both[q2] = 's';
      out[both] += kA * amp;
    }
  }
  return out;
}

PurityDistribution purities_network(const QcnnLayout& layout, uint32_t observable_qubit) {
  if (observable_qubit >= layout.n)
    throw std::invalid_argument("purities_network: observable qubit out of range");
  IsState state;
  std::string start(layout.n, 'i');
  start[observable_qubit] = 's';
  state[start] = 2.0 / 3.0;

  // Heisenberg order: readout-side blocks first.
  for (auto layer = layout.layers.rbegin(); layer != layout.layers.rend(); ++layer)
    for (auto block = layer->rbegin(); block != layer->rend(); ++block)
      state = pgate_apply(state, block->first, block->second);

  PurityDistribution dist;
  dist.n = layout.n;
  dist.method = "network";
  dist.values.assign(layout.n + 1, 0.0);
  for (const auto& [str, amp] : state) {
    uint32_t sigma = 0;
    for (char c : str) sigma += c == 's';
    accumulate_split(dist.values, amp, sigma);
  }
  return dist;
}

PurityDistribution purities_recursive(uint32_t L) {
  if (L == 0) throw std::invalid_argument("purities_recursive: need L >= 1");
  if (L > 16) throw std::runtime_error("purities_recursive: L too large for the sum budget");
  const uint32_t n = 1u << L;

  // f[kappa] = sum over s-pair trajectories (k_1=1,...,k_{L-1}) ending with
  // kappa pairs entering the final layer, weighted by the branch binomials
  // and the per-layer amplitude a^(2 k_j).
  std::vector<double> f(2, 0.0);
  f[1] = 1.0;
  for (uint32_t j = 1; j < L; ++j) {
    uint32_t kmax = static_cast<uint32_t>(f.size()) - 1;
    std::vector<double> next(2 * kmax + 1, 0.0);
    for (uint32_t kappa = 1; kappa <= kmax; ++kappa) {
      if (f[kappa] == 0.0) continue;
      double factor = f[kappa] * std::pow(kA, 2.0 * kappa);
      for (uint32_t kp = 1; kp <= 2 * kappa; ++kp)
        next[kp] += factor * binom(2 * kappa, kp);
    }
    f = std::move(next);
  }

  PurityDistribution dist;
  dist.n = n;
  dist.method = "recursive";
  dist.values.assign(n + 1, 0.0);
  for (uint32_t kappa = 1; kappa < f.size(); ++kappa) {
    if (f[kappa] == 0.0) continue;
    accumulate_split(dist.values, (2.0 / 3.0) * kA * f[kappa], 2 * kappa);
  }
  return dist;
}

namespace {

using Eigen::Matrix4cd;
using Eigen::MatrixXcd;

Matrix4cd haar_u4(Rng& rng) {
  Matrix4cd g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      g(r, c) = std::complex<double>(rng.normal(), rng.normal()) * M_SQRT1_2;
  Eigen::HouseholderQR<Matrix4cd> qr(g);
  Matrix4cd q = qr.householderQ();
  Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 4; ++i) {
    std::complex<double> d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

// Two-qubit Pauli matrices indexed o = o1 + 4*o2 (o1 = low/first qubit of
// the block), digits 0..3 = I,X,Y,Z.
const std::array<Matrix4cd, 16>& two_qubit_paulis() {
  static const std::array<Matrix4cd, 16> table = [] {
    using namespace std::complex_literals;
    Eigen::Matrix2cd p[4];
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -1i, 1i, 0;
    p[3] << 1, 0, 0, -1;
    std::array<Matrix4cd, 16> t;
    for (int o2 = 0; o2 < 4; ++o2)
      for (int o1 = 0; o1 < 4; ++o1) {
        Matrix4cd m;
        for (int r2 = 0; r2 < 2; ++r2)
          for (int c2 = 0; c2 < 2; ++c2)
            m.block<2, 2>(2 * r2, 2 * c2) = p[o2](r2, c2) * p[o1];
        t[o1 + 4 * o2] = m;
      }
    return t;
  }();
  return table;
}

// Heisenberg-picture transfer matrix: R[a][b] = (1/4) Tr[P_a U^dag P_b U].
void transfer_matrix(const Matrix4cd& u, double R[16][16]) {
  const auto& paulis = two_qubit_paulis();
  std::array<Matrix4cd, 16> conj;
  for (int b = 0; b < 16; ++b) conj[b] = u.adjoint() * paulis[b] * u;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b)
      R[a][b] = 0.25 * (paulis[a] * conj[b]).trace().real();
}

}  // namespace

PurityDistribution purities_mc(const QcnnLayout& layout, uint32_t observable_qubit,
                               size_t samples, uint64_t seed) {
  const uint32_t n = layout.n;
  if (n > 10) throw std::invalid_argument("purities_mc: n > 10 exceeds the 4^n budget");
  if (observable_qubit >= n)
    throw std::invalid_argument("purities_mc: observable qubit out of range");
  if (samples == 0) throw std::invalid_argument("purities_mc: need samples >= 1");
  const size_t dim = size_t{1} << (2 * n);

  std::vector<uint8_t> weight(dim);
  for (size_t idx = 0; idx < dim; ++idx) {
    uint8_t w = 0;
    for (size_t t = idx; t; t >>= 2) w += (t & 3) != 0;
    weight[idx] = w;
  }
  std::vector<size_t> pow4(n);
  for (uint32_t q = 0; q < n; ++q) pow4[q] = size_t{1} << (2 * q);

  std::vector<std::pair<uint32_t, uint32_t>> blocks;  // reverse circuit order
  for (auto layer = layout.layers.rbegin(); layer != layout.layers.rend(); ++layer)
    for (auto block = layer->rbegin(); block != layer->rend(); ++block)
      blocks.push_back(*block);

  Rng rng(seed);
  std::vector<double> c(dim), sum(n + 1, 0.0), sumsq(n + 1, 0.0);
  double R[16][16];
  double in[16], out[16];

  for (size_t s = 0; s < samples; ++s) {
    std::fill(c.begin(), c.end(), 0.0);
    c[3 * pow4[observable_qubit]] = 1.0;  // Z on the observable qubit

    for (auto [q1, q2] : blocks) {
      transfer_matrix(haar_u4(rng), R);
      const size_t s1 = pow4[q1], s2 = pow4[q2];
      for (size_t base = 0; base < dim; ++base) {
        if ((base / s1) % 4 != 0 || (base / s2) % 4 != 0) continue;
        for (int o = 0; o < 16; ++o) in[o] = c[base + (o & 3) * s1 + (o >> 2) * s2];
        for (int a = 0; a < 16; ++a) {
          double acc = 0;
          for (int b = 0; b < 16; ++b) acc += R[a][b] * in[b];
          out[a] = acc;
        }
        for (int o = 0; o < 16; ++o) c[base + (o & 3) * s1 + (o >> 2) * s2] = out[o];
      }
    }

    std::vector<double> pk(n + 1, 0.0);
    for (size_t idx = 0; idx < dim; ++idx) pk[weight[idx]] += c[idx] * c[idx];
    for (uint32_t k = 0; k <= n; ++k) {
      sum[k] += pk[k];
      sumsq[k] += pk[k] * pk[k];
    }
  }

  PurityDistribution dist;
  dist.n = n;
  dist.method = "mc";
  dist.values.assign(n + 1, 0.0);
  dist.stderrs.assign(n + 1, 0.0);
  for (uint32_t k = 0; k <= n; ++k) {
    double mean = sum[k] / static_cast<double>(samples);
    dist.values[k] = mean;
    if (samples > 1) {
      double var = (sumsq[k] - static_cast<double>(samples) * mean * mean) /
                   static_cast<double>(samples - 1);
      dist.stderrs[k] = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
    }
  }
  return dist;
}

void save_purities(const PurityDistribution& dist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_purities: cannot open " + path);
  out << "k,value,stderr,method\n";
  out.precision(17);
  for (uint32_t k = 0; k < dist.values.size(); ++k) {
    out << k << "," << dist.values[k] << ",";
    if (!dist.stderrs.empty()) out << dist.stderrs[k];
    out << "," << dist.method << "\n";
  }
}

}  // namespace lowpp
