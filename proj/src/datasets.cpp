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

#include "lowpp/datasets.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "lowpp/rng.hpp"

namespace lowpp {

std::string model_name(SpinModel m) {
  switch (m) {
    case SpinModel::kXXX: return "xxx";
    case SpinModel::kHaldane: return "haldane";
    case SpinModel::kAnnni: return "annni";
    case SpinModel::kCluster: return "cluster";
  }
  throw std::invalid_argument("model_name: bad model");
}

SpinModel model_from_name(const std::string& name) {
  if (name == "xxx") return SpinModel::kXXX;
  if (name == "haldane") return SpinModel::kHaldane;
  if (name == "annni") return SpinModel::kAnnni;
  if (name == "cluster") return SpinModel::kCluster;
  throw std::invalid_argument("model_from_name: unknown model " + name);
}

namespace {

void add_term(PauliSum& sum, uint32_t n, double coeff,
              std::initializer_list<std::pair<uint32_t, char>> sites) {
  if (coeff == 0.0) return;
  PauliString p(n);
  for (auto [q, letter] : sites) p.set(q, letter);
  sum.add(p, coeff);
}

}  // namespace

PauliSum hamiltonian_terms(const HamiltonianSpec& spec) {
  const uint32_t n = spec.n;
  PauliSum h;
  switch (spec.model) {
    case SpinModel::kXXX: {
      if (n < 2) throw std::invalid_argument("hamiltonian_terms: XXX needs n >= 2");
      // 1-based bond index i: odd bonds carry j2, even bonds j1.
      for (uint32_t i = 1; i <= n - 1; ++i) {
        double ji = (i % 2 == 1) ? spec.j2 : spec.j1;
        uint32_t q = i - 1;
        add_term(h, n, ji, {{q, 'X'}, {q + 1, 'X'}});
        add_term(h, n, ji, {{q, 'Y'}, {q + 1, 'Y'}});
        add_term(h, n, ji, {{q, 'Z'}, {q + 1, 'Z'}});
      }
      break;
    }
    case SpinModel::kHaldane: {
      if (n < 3) throw std::invalid_argument("hamiltonian_terms: Haldane needs n >= 3");
      for (uint32_t q = 0; q + 2 < n; ++q)
        add_term(h, n, -spec.j, {{q, 'Z'}, {q + 1, 'X'}, {q + 2, 'Z'}});
      for (uint32_t q = 0; q < n; ++q) add_term(h, n, -spec.h1, {{q, 'X'}});
      for (uint32_t q = 0; q + 1 < n; ++q)
        add_term(h, n, -spec.h2, {{q, 'X'}, {q + 1, 'X'}});
      break;
    }
    case SpinModel::kAnnni: {
      if (n < 3) throw std::invalid_argument("hamiltonian_terms: ANNNI needs n >= 3");
      for (uint32_t q = 0; q + 1 < n; ++q)
        add_term(h, n, -spec.j1, {{q, 'X'}, {q + 1, 'X'}});
      for (uint32_t q = 0; q + 2 < n; ++q)
        add_term(h, n, -spec.j2, {{q, 'X'}, {q + 2, 'X'}});
      for (uint32_t q = 0; q < n; ++q) add_term(h, n, -spec.b, {{q, 'Z'}});
      break;
    }
    case SpinModel::kCluster: {
      if (n < 3) throw std::invalid_argument("hamiltonian_terms: Cluster needs n >= 3");
      // Periodic chain: site indices wrap.
      for (uint32_t q = 0; q < n; ++q) {
        uint32_t prev = (q + n - 1) % n, next = (q + 1) % n;
        add_term(h, n, 1.0, {{q, 'Z'}});
        add_term(h, n, -spec.j1, {{q, 'X'}, {next, 'X'}});
        add_term(h, n, -spec.j2, {{prev, 'X'}, {q, 'Z'}, {next, 'X'}});
      }
      break;
    }
  }
  return h;
}

namespace {

// Real-arithmetic form of one Pauli term: every Hamiltonian here has an even
// number of Y factors per term, so i^{#Y} is a real sign folded into coeff.
struct RealTerm {
  uint64_t x = 0, z = 0;
  double coeff = 0;
};

std::vector<RealTerm> real_terms(const PauliSum& sum, uint32_t n) {
  if (n > kMaxOracleQubits)
    throw std::invalid_argument("ground_state: n exceeds the dense-state limit");
  std::vector<RealTerm> out;
  for (const auto& [p, coeff] : sum) {
    RealTerm t;
    t.x = p.x_words().empty() ? 0 : p.x_words()[0];
    t.z = p.z_words().empty() ? 0 : p.z_words()[0];
    int ny = std::popcount(t.x & t.z);
    if (ny % 2 != 0)
      throw std::invalid_argument("ground_state: Hamiltonian term is not real");
    t.coeff = coeff * ((ny % 4 == 2) ? -1.0 : 1.0);  // i^{#Y} for even #Y
    out.push_back(t);
  }
  return out;
}

void matvec(const std::vector<RealTerm>& terms, const Eigen::VectorXd& v,
            Eigen::VectorXd& out) {
  out.setZero();
  const size_t dim = static_cast<size_t>(v.size());
  for (const auto& t : terms) {
    for (size_t b = 0; b < dim; ++b) {
      double sign = (std::popcount(t.z & b) & 1) ? -t.coeff : t.coeff;
      out[static_cast<Eigen::Index>(b ^ t.x)] += sign * v[static_cast<Eigen::Index>(b)];
    }
  }
}

GroundState dense_ground_state(const std::vector<RealTerm>& terms, uint32_t n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& t : terms)
    for (Eigen::Index b = 0; b < dim; ++b) {
      double sign = (std::popcount(t.z & static_cast<uint64_t>(b)) & 1) ? -t.coeff : t.coeff;
      H(static_cast<Eigen::Index>(static_cast<uint64_t>(b) ^ t.x), b) += sign;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  GroundState gs;
  gs.energy = solver.eigenvalues()(0);
  gs.gap = solver.eigenvalues()(1) - solver.eigenvalues()(0);
  gs.degenerate = gs.gap < 1e-6;
  Eigen::VectorXd v = solver.eigenvectors().col(0);
  // Phase fix: largest-magnitude amplitude made positive.
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  gs.psi.resize(static_cast<size_t>(dim));
  for (Eigen::Index b = 0; b < dim; ++b) gs.psi[static_cast<size_t>(b)] = v(b);
  return gs;
}

GroundState lanczos_ground_state(const std::vector<RealTerm>& terms, uint32_t n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const int m = static_cast<int>(std::min<Eigen::Index>(60, dim));
  const int max_cycles = 60;
  const double tol = 1e-9;

  Rng rng(0x9e3779b97f4a7c15ull);  // fixed start vector; deterministic
  Eigen::VectorXd v(dim);
  for (Eigen::Index b = 0; b < dim; ++b) v(b) = rng.normal();
  v.normalize();

  Eigen::MatrixXd V(dim, m);
  Eigen::VectorXd w(dim), alpha(m), beta(m);
  double lambda0 = 0, gap = 0, resid = 1e300;

  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    int m_eff = m;
    V.col(0) = v;
    for (int j = 0; j < m; ++j) {
      matvec(terms, V.col(j), w);
      alpha(j) = V.col(j).dot(w);
      w -= alpha(j) * V.col(j);
      if (j > 0) w -= beta(j - 1) * V.col(j - 1);
      // Full reorthogonalization keeps the basis clean without ghosts.
      for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
      double nb = w.norm();
      beta(j) = nb;
      if (nb < 1e-12) {
        m_eff = j + 1;
        break;
      }
      if (j + 1 < m) V.col(j + 1) = w / nb;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_eff, m_eff);
    for (int j = 0; j < m_eff; ++j) {
      T(j, j) = alpha(j);
      if (j + 1 < m_eff) T(j, j + 1) = T(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(T);
    lambda0 = solver.eigenvalues()(0);
    gap = m_eff > 1 ? solver.eigenvalues()(1) - lambda0 : 0.0;
    v = V.leftCols(m_eff) * solver.eigenvectors().col(0);
    v.normalize();
    matvec(terms, v, w);
    lambda0 = v.dot(w);  // Rayleigh quotient of the Ritz vector
    resid = (w - lambda0 * v).norm();
    if (resid < tol) break;
  }
  if (resid > 1e-6)
    throw std::runtime_error("ground_state: Lanczos did not converge (residual " +
                             std::to_string(resid) + ")");
  GroundState gs;
  gs.energy = lambda0;
  gs.gap = gap;
  gs.degenerate = gap < 1e-6;
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  gs.psi.resize(static_cast<size_t>(dim));
  for (Eigen::Index b = 0; b < dim; ++b) gs.psi[static_cast<size_t>(b)] = v(b);
  return gs;
}

}  // namespace

GroundState ground_state(const HamiltonianSpec& spec) {
  auto terms = real_terms(hamiltonian_terms(spec), spec.n);
  return spec.n <= 10 ? dense_ground_state(terms, spec.n)
                      : lanczos_ground_state(terms, spec.n);
}

LabelResult assign_label(const HamiltonianSpec& spec) {
  switch (spec.model) {
    case SpinModel::kXXX:
      return {spec.j2 < spec.j1 ? 0 : 1, false};
    case SpinModel::kHaldane:
      return {spec.h2 < 0.423 ? 0 : 1, false};
    case SpinModel::kAnnni: {
      if (spec.j1 <= 0)
        throw std::invalid_argument("assign_label: ANNNI rule requires j1 > 0");
      double kappa = -spec.j2 / spec.j1;
      double h = spec.b / spec.j1;
      if (kappa < 0 || h < 0)
        throw std::invalid_argument(
            "assign_label: ANNNI rule covers kappa >= 0, h >= 0 only");
      if (kappa <= 0.5) {
        // Perturbative ferromagnet/paramagnet boundary; exact at kappa=0.
        double hc = kappa < 1e-9
                        ? 1.0
                        : (1.0 - kappa) / kappa *
                              (1.0 - std::sqrt((1.0 - 3.0 * kappa + 4.0 * kappa * kappa) /
                                               (1.0 - kappa)));
        return {h < hc ? 0 : 1, true};
      }
      // Peschel-Emery line bounds the antiphase; a narrow floating band
      // sits above it before the paramagnet.
      double hpe = 1.05 * std::sqrt((kappa - 0.5) * (kappa - 0.1));
      if (h < hpe) return {2, true};
      if (h < hpe + 0.3) return {3, true};
      return {1, true};
    }
    case SpinModel::kCluster: {
      // Free-fermion boundary lines of the periodic cluster chain.
      if (spec.j2 > 1.0 + std::abs(spec.j1)) return {3, true};  // SPT
      if (spec.j1 > 0 && spec.j1 + spec.j2 > 1.0) return {1, true};   // FM
      if (spec.j1 < 0 && -spec.j1 + spec.j2 > 1.0) return {2, true};  // AFM
      return {0, true};
    }
  }
  throw std::invalid_argument("assign_label: bad model");
}

namespace {

std::string format_id(SpinModel model, size_t idx) {
  std::ostringstream os;
  os << model_name(model) << "_" << std::setw(3) << std::setfill('0') << idx;
  return os.str();
}

}  // namespace

std::vector<DatasetPoint> generate_dataset(const std::vector<HamiltonianSpec>& grid,
                                           const GenerateOptions& options) {
  if (!options.labels.empty() && options.labels.size() != grid.size())
    throw std::invalid_argument("generate_dataset: label override length mismatch");
  std::filesystem::create_directories(options.out_dir);
  std::vector<DatasetPoint> points;
  for (size_t idx = 0; idx < grid.size(); ++idx) {
    const auto& spec = grid[idx];
    DatasetPoint pt;
    pt.state_id = format_id(spec.model, idx);
    pt.spec = spec;
    if (!options.labels.empty()) {
      pt.label = options.labels[idx];
      pt.approximate_label = false;
    } else {
      auto lr = assign_label(spec);
      pt.label = lr.label;
      pt.approximate_label = lr.approximate;
    }
    auto gs = ground_state(spec);
    pt.energy = gs.energy;
    pt.gap = gs.gap;

    if (options.shadows > 0) {
      auto set = sample_shadows(gs.psi, spec.n, options.shadows,
                                substream_seed(options.seed, "shadows", idx));
      set.state_id = pt.state_id;
      set.label = pt.label;
      pt.shadow_file = pt.state_id + ".shadows";
      save_shadows(set, options.out_dir + "/" + pt.shadow_file);
    }
    if (options.exact_mode)
      save_statevector(gs.psi, spec.n, pt.state_id,
                       options.out_dir + "/" + pt.state_id + ".sv");
    points.push_back(std::move(pt));
  }
  save_manifest(points, options.out_dir + "/manifest.csv");
  return points;
}

void save_manifest(const std::vector<DatasetPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
  out << "state_id,model,n,j1,j2,j,h1,h2,b,label,approximate,energy,gap,shadow_file\n";
  out.precision(17);
  for (const auto& pt : points) {
    out << pt.state_id << "," << model_name(pt.spec.model) << "," << pt.spec.n << ","
        << pt.spec.j1 << "," << pt.spec.j2 << "," << pt.spec.j << "," << pt.spec.h1 << ","
        << pt.spec.h2 << "," << pt.spec.b << "," << pt.label << ","
        << (pt.approximate_label ? 1 : 0) << "," << pt.energy << "," << pt.gap << ","
        << pt.shadow_file << "\n";
  }
}

std::vector<DatasetPoint> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_manifest: empty " + path);
  std::vector<DatasetPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    DatasetPoint pt;
    auto next = [&]() -> std::string {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("load_manifest: short row");
      return cell;
    };
    pt.state_id = next();
    pt.spec.model = model_from_name(next());
    pt.spec.n = static_cast<uint32_t>(std::stoul(next()));
    pt.spec.j1 = std::stod(next());
    pt.spec.j2 = std::stod(next());
    pt.spec.j = std::stod(next());
    pt.spec.h1 = std::stod(next());
    pt.spec.h2 = std::stod(next());
    pt.spec.b = std::stod(next());
    pt.label = std::stoi(next());
    pt.approximate_label = std::stoi(next()) != 0;
    pt.energy = std::stod(next());
    pt.gap = std::stod(next());
    std::getline(ls, pt.shadow_file, ',');  // may be empty
    points.push_back(std::move(pt));
  }
  return points;
}

namespace {
constexpr char kSvMagic[4] = {'L', 'P', 'S', 'V'};
}

void save_statevector(const StateVector& psi, uint32_t n, const std::string& state_id,
                      const std::string& path) {
  if (psi.size() != (size_t{1} << n))
    throw std::invalid_argument("save_statevector: dimension mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_statevector: cannot open " + path);
  out.write(kSvMagic, 4);
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  uint32_t idlen = static_cast<uint32_t>(state_id.size());
  out.write(reinterpret_cast<const char*>(&idlen), sizeof(idlen));
  out.write(state_id.data(), idlen);
  out.write(reinterpret_cast<const char*>(psi.data()),
            static_cast<std::streamsize>(psi.size() * sizeof(std::complex<double>)));
  if (!out) throw std::runtime_error("save_statevector: write failed for " + path);
}

StateVector load_statevector(const std::string& path, uint32_t* n_out,
                             std::string* state_id_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_statevector: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kSvMagic, 4) != 0)
    throw std::runtime_error("load_statevector: bad magic in " + path);
  uint32_t n, idlen;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&idlen), sizeof(idlen));
  std::string id(idlen, '?');
  in.read(id.data(), idlen);
  StateVector psi(size_t{1} << n);
  in.read(reinterpret_cast<char*>(psi.data()),
          static_cast<std::streamsize>(psi.size() * sizeof(std::complex<double>)));
  if (!in) throw std::runtime_error("load_statevector: truncated file " + path);
  if (n_out) *n_out = n;
  if (state_id_out) *state_id_out = id;
  return psi;
}

}  // namespace lowpp
