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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lowpp/datasets.hpp"
#include "lowpp/learn.hpp"
#include "lowpp/propagation.hpp"
#include "lowpp/purity.hpp"
#include "lowpp/rng.hpp"
#include "lowpp/shadows.hpp"
#include "lowpp/statevector.hpp"
#include "lowpp/surrogate.hpp"

namespace {

using namespace lowpp;

// ---------------------------------------------------------------------------
// Shared helpers

LayoutStyle parse_style(const std::string& s) {
  if (s == "brick") return LayoutStyle::kBrick;
  if (s == "noncrossing") return LayoutStyle::kNonCrossing;
  throw CLI::ValidationError("style", "expected brick or noncrossing");
}

Task parse_task(const std::string& s) {
  if (s == "binary") return Task::kBinary;
  if (s == "fourclass") return Task::kFourClass;
  throw CLI::ValidationError("task", "expected binary or fourclass");
}

TrainConfig::Loss parse_loss(const std::string& s) {
  if (s == "cross-entropy") return TrainConfig::Loss::kCrossEntropy;
  if (s == "mse") return TrainConfig::Loss::kMse;
  throw CLI::ValidationError("loss", "expected cross-entropy or mse");
}

// Replays of a run manifest must reproduce outputs byte for byte, so the
// manifest is simply the parsed option set in config format; `lowpp --config
// <manifest>` reruns the command.
void write_run_manifest(const CLI::App& app, const std::string& path) {
  if (path.empty()) return;
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run manifest " + path);
  out << app.config_to_str(true, false);
}

// "name=lo:hi:count" -> evenly spaced sweep of one Hamiltonian field.
struct GridAxis {
  std::string name;
  double lo = 0, hi = 0;
  size_t count = 1;
};

GridAxis parse_axis(const std::string& text) {
  GridAxis a;
  auto eq = text.find('=');
  auto c1 = text.find(':', eq);
  auto c2 = text.find(':', c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("grid", "expected name=lo:hi:count");
  a.name = text.substr(0, eq);
  a.lo = std::stod(text.substr(eq + 1, c1 - eq - 1));
  a.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  a.count = std::stoul(text.substr(c2 + 1));
  if (a.count == 0) throw CLI::ValidationError("grid", "count must be positive");
  return a;
}

void set_field(HamiltonianSpec& spec, const std::string& name, double v) {
  if (name == "j1") spec.j1 = v;
  else if (name == "j2") spec.j2 = v;
  else if (name == "j") spec.j = v;
  else if (name == "h1") spec.h1 = v;
  else if (name == "h2") spec.h2 = v;
  else if (name == "b") spec.b = v;
  else throw CLI::ValidationError("grid", "unknown field " + name);
}

double axis_value(const GridAxis& a, size_t i) {
  return a.count == 1 ? a.lo : a.lo + (a.hi - a.lo) * static_cast<double>(i) /
                                          static_cast<double>(a.count - 1);
}

// All Pauli strings of weight <= k; with window > 0, only those whose
// support fits inside a contiguous window of that many qubits.
std::vector<PauliString> lowbody_ops(uint32_t n, uint32_t k, uint32_t window) {
  std::vector<PauliString> ops;
  const char letters[3] = {'X', 'Y', 'Z'};
  auto emit = [&](const std::vector<uint32_t>& support) {
    std::vector<size_t> letter_idx(support.size(), 0);
    PauliString p(n);
    for (;;) {
      for (size_t i = 0; i < support.size(); ++i) p.set(support[i], letters[letter_idx[i]]);
      ops.push_back(p);
      size_t i = 0;
      while (i < support.size() && ++letter_idx[i] == 3) letter_idx[i++] = 0;
      if (i == support.size()) break;
    }
  };
  // Enumerate support subsets of each size up to k.
  std::vector<uint32_t> idx;
  auto rec = [&](auto&& self, uint32_t start, uint32_t remaining) -> void {
    if (!idx.empty()) emit(idx);
    if (remaining == 0) return;
    for (uint32_t q = start; q < n; ++q) {
      idx.push_back(q);
      if (window == 0 || q - idx.front() + 1 <= window) self(self, q + 1, remaining - 1);
      idx.pop_back();
    }
  };
  rec(rec, 0, k);
  std::sort(ops.begin(), ops.end());
  return ops;
}

std::vector<PauliString> ops_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open operator list " + path);
  std::vector<PauliString> ops;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ops.push_back(PauliString::from_text(line));
  return ops;
}

// ---------------------------------------------------------------------------
// Subcommand state

struct DatasetArgs {
  std::string model = "xxx";
  uint32_t n = 8;
  std::vector<std::string> grid;
  double j1 = 1, j2 = 0, j = 1, h1 = 0.5, h2 = 0, b = 0;
  size_t shadows = 0;
  bool exact = false;
  uint64_t seed = 0;
  std::string out = "dataset";
  std::string labels_file;
  std::string manifest_out;
};

int run_dataset(const DatasetArgs& a) {
  HamiltonianSpec base;
  base.model = model_from_name(a.model);
  base.n = a.n;
  base.j1 = a.j1;
  base.j2 = a.j2;
  base.j = a.j;
  base.h1 = a.h1;
  base.h2 = a.h2;
  base.b = a.b;

  std::vector<GridAxis> axes;
  for (const auto& g : a.grid) axes.push_back(parse_axis(g));
  if (axes.size() > 2) throw CLI::ValidationError("grid", "at most two sweep axes");

  std::vector<HamiltonianSpec> specs;
  if (axes.empty()) {
    specs.push_back(base);
  } else if (axes.size() == 1) {
    for (size_t i = 0; i < axes[0].count; ++i) {
      auto s = base;
      set_field(s, axes[0].name, axis_value(axes[0], i));
      specs.push_back(s);
    }
  } else {
    for (size_t i = 0; i < axes[0].count; ++i)
      for (size_t k = 0; k < axes[1].count; ++k) {
        auto s = base;
        set_field(s, axes[0].name, axis_value(axes[0], i));
        set_field(s, axes[1].name, axis_value(axes[1], k));
        specs.push_back(s);
      }
  }

  GenerateOptions opt;
  opt.shadows = a.shadows;
  opt.exact_mode = a.exact;
  opt.seed = a.seed;
  opt.out_dir = a.out;
  if (!a.labels_file.empty()) {
    std::ifstream in(a.labels_file);
    if (!in) throw std::runtime_error("cannot open labels file " + a.labels_file);
    int v;
    while (in >> v) opt.labels.push_back(v);
  }
  auto points = generate_dataset(specs, opt);
  std::cout << "dataset states=" << points.size() << " out=" << a.out << "\n";
  return 0;
}

struct ShadowsArgs {
  std::string manifest;
  size_t shots = 100;
  uint64_t seed = 0;
  std::string out;
  std::string manifest_out;
};

int run_shadows(const ShadowsArgs& a) {
  auto points = load_manifest(a.manifest);
  std::string dir = std::filesystem::path(a.manifest).parent_path().string();
  std::string out_dir = a.out.empty() ? dir : a.out;
  std::filesystem::create_directories(out_dir);
  for (size_t i = 0; i < points.size(); ++i) {
    auto& pt = points[i];
    auto psi = load_statevector(dir + "/" + pt.state_id + ".sv");
    auto set = sample_shadows(psi, pt.spec.n, a.shots, substream_seed(a.seed, "shadows", i));
    set.state_id = pt.state_id;
    set.label = pt.label;
    pt.shadow_file = pt.state_id + ".shadows";
    save_shadows(set, out_dir + "/" + pt.shadow_file);
  }
  save_manifest(points, out_dir + "/manifest.csv");
  std::cout << "shadows states=" << points.size() << " shots=" << a.shots << "\n";
  return 0;
}

struct FeaturesArgs {
  std::string manifest;
  uint32_t k = 2;
  uint32_t window = 0;
  bool exact = false;
  std::string ops_file;
  size_t stride = 1;
  size_t offset = 0;
  std::string out = "features.csv";
  std::string manifest_out;
};

int run_features(const FeaturesArgs& a) {
  auto points = load_manifest(a.manifest);
  std::string dir = std::filesystem::path(a.manifest).parent_path().string();
  std::vector<DatasetPoint> chosen;
  for (size_t i = 0; i < points.size(); ++i)
    if (i % a.stride == a.offset % a.stride) chosen.push_back(points[i]);
  if (chosen.empty()) throw std::runtime_error("features: empty row selection");

  uint32_t n = chosen.front().spec.n;
  auto ops = a.ops_file.empty() ? lowbody_ops(n, a.k, a.window) : ops_from_file(a.ops_file);

  FeatureTable table;
  if (a.exact) {
    std::vector<StateVector> states;
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& pt : chosen) {
      states.push_back(load_statevector(dir + "/" + pt.state_id + ".sv"));
      ids.push_back(pt.state_id);
      labels.push_back(pt.label);
    }
    table = build_feature_table_exact(states, ids, labels, ops);
  } else {
    std::vector<ShadowSet> sets;
    for (const auto& pt : chosen) {
      if (pt.shadow_file.empty())
        throw std::runtime_error("features: state " + pt.state_id + " has no shadow file");
      sets.push_back(load_shadows(dir + "/" + pt.shadow_file));
    }
    table = build_feature_table(sets, ops);
  }
  save_feature_table(table, a.out);
  std::cout << "features states=" << table.rows.size() << " ops=" << ops.size() << " out="
            << a.out << "\n";
  return 0;
}

struct SurrogateArgs {
  uint32_t n = 8;
  std::string style = "noncrossing";
  std::string task = "binary";
  uint32_t k = 2;
  uint32_t freq = kUnlimited;
  std::string out = "model.json";
  std::string manifest_out;
};

int run_surrogate(const SurrogateArgs& a) {
  TruncationPolicy policy;
  policy.max_weight = a.k;
  policy.max_frequency = a.freq;
  Model m = build_model(a.n, parse_style(a.style), parse_task(a.task), policy);
  save_model(m, a.out);
  size_t leaves = 0, nodes = 0;
  for (const auto& g : m.graphs) {
    leaves += g.leaves.size();
    nodes += g.nodes.size();
  }
  std::cout << "surrogate graphs=" << m.graphs.size() << " nodes=" << nodes
            << " leaves=" << leaves << " out=" << a.out << "\n";
  return 0;
}

struct SelectArgs {
  std::string model;
  std::string features;
  size_t M = 400;
  uint32_t window = 0;
  std::string out;
  std::string manifest_out;
};

int run_select(const SelectArgs& a) {
  Model m = load_model(a.model);
  auto table = load_feature_table(a.features);
  select_model_active(m, table, a.M, a.window);
  save_model(m, a.out.empty() ? a.model : a.out);
  size_t active = 0;
  for (const auto& s : m.active) active += s.leaf_indices.size();
  std::cout << "select active=" << active << "\n";
  return 0;
}

struct TrainArgs {
  std::string model;
  std::string features;
  std::string loss = "cross-entropy";
  size_t iters = 200;
  size_t restarts = 5;
  uint64_t seed = 0;
  size_t memory = 10;
  double tol = 1e-8;
  double init_scale = 0.1 * M_PI;
  std::string out;
  std::string metrics;
  std::string manifest_out;
};

int run_train(const TrainArgs& a) {
  Model m = load_model(a.model);
  auto table = load_feature_table(a.features);
  TrainConfig cfg;
  cfg.loss = parse_loss(a.loss);
  cfg.max_iterations = a.iters;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.memory = a.memory;
  cfg.tolerance = a.tol;
  cfg.init_scale = a.init_scale;
  auto result = train(m, table, cfg);
  save_model(m, a.out.empty() ? a.model : a.out);
  if (!a.metrics.empty()) save_metrics(result, a.metrics);
  std::cout << "train loss=" << result.final_loss << " train_acc=" << result.train_accuracy
            << " restarts=" << cfg.restarts << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string features;
  std::string out;
  std::string manifest_out;
};

int run_eval(const EvalArgs& a) {
  Model m = load_model(a.model);
  auto table = load_feature_table(a.features);
  auto ev = evaluate(m, table);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot open " + a.out);
    out.precision(17);
    out << "accuracy," << ev.accuracy << "\n";
    for (size_t t = 0; t < ev.confusion.size(); ++t) {
      out << "confusion_" << t;
      for (size_t p = 0; p < ev.confusion[t].size(); ++p) out << "," << ev.confusion[t][p];
      out << "\n";
    }
  }
  std::cout << "eval accuracy=" << ev.accuracy << "\n";
  return 0;
}

struct PurityArgs {
  std::string method = "recursive";
  uint32_t layers = 4;
  uint32_t n = 0;
  std::string style = "noncrossing";
  int qubit = -1;
  size_t samples = 1000;
  uint64_t seed = 0;
  std::string out = "purity.csv";
  std::string manifest_out;
};

int run_purity(const PurityArgs& a) {
  PurityDistribution dist;
  if (a.method == "recursive") {
    dist = purities_recursive(a.layers);
  } else {
    uint32_t n = a.n ? a.n : 1u << a.layers;
    auto [circ, layout] = build_qcnn(n, parse_style(a.style));
    (void)circ;
    uint32_t q = a.qubit >= 0 ? static_cast<uint32_t>(a.qubit) : layout.readout_qubits.front();
    if (a.method == "network") dist = purities_network(layout, q);
    else if (a.method == "mc") dist = purities_mc(layout, q, a.samples, a.seed);
    else throw CLI::ValidationError("method", "expected recursive, network, or mc");
  }
  save_purities(dist, a.out);
  std::cout << "purity method=" << dist.method << " n=" << dist.n << " out=" << a.out << "\n";
  return 0;
}

struct CheckArgs {
  uint32_t n = 8;
  size_t trials = 20;
  uint64_t seed = 1;
  std::string manifest_out;
};

// Oracle equivalence: untruncated propagation and surrogate evaluation must
// match the dense statevector simulation on random inputs.
int run_check(const CheckArgs& a) {
  auto [circuit, layout] = build_qcnn(a.n, LayoutStyle::kNonCrossing);
  PauliString obs = PauliString::single(a.n, layout.readout_qubits.front(), 'Z');
  PauliSum obs_sum;
  obs_sum.add(obs, 1.0);
  TruncationPolicy policy;  // untruncated
  auto graph = surrogate_build(circuit, obs_sum, policy);
  auto active = all_leaves(graph);

  double max_gap = 0;
  Rng rng(a.seed);
  for (size_t t = 0; t < a.trials; ++t) {
    std::vector<double> theta(circuit.n_params);
    for (double& v : theta) v = rng.uniform(-M_PI, M_PI);
    auto psi = random_product_state(a.n, rng);

    auto evolved = psi;
    run_circuit(circuit, theta, evolved);
    double oracle = exact_expectation(evolved, obs);

    auto prop = propagate(circuit, obs_sum, theta, policy);
    double via_prop = expectation_from_state(prop, psi);

    std::unordered_map<PauliString, double, PauliStringHash> row;
    for (const auto& leaf : graph.leaves)
      if (!row.count(leaf.pauli)) row[leaf.pauli] = exact_expectation(psi, leaf.pauli);
    double via_graph = surrogate_evaluate(graph, active, theta, row);

    max_gap = std::max({max_gap, std::abs(via_prop - oracle), std::abs(via_graph - oracle)});
  }
  std::cout << "check n=" << a.n << " trials=" << a.trials << " max_gap=" << max_gap << "\n";
  if (max_gap >= 1e-9) {
    std::cerr << "check FAILED: gap " << max_gap << " exceeds 1e-9\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("LOWPP_THREADS")) (void)threads;  // single-threaded build

  CLI::App app{"Pauli-propagation surrogate pipeline for spin-chain phase classification"};
  app.require_subcommand(1);
  // Defaults are serialized into run manifests, so every option must carry a
  // replayable textual default.
  app.option_defaults()->always_capture_default(true);
  app.set_config("--config", "", "Replay a previously written run manifest");

  auto add_manifest = [](CLI::App* sub, std::string& slot) {
    sub->add_option("--manifest-out", slot, "Write the parsed options as a replayable manifest");
    sub->configurable(true);
  };

  DatasetArgs da;
  auto* ds = app.add_subcommand("dataset", "Generate ground states, labels, and optional shadows");
  ds->add_option("--model", da.model, "xxx|haldane|annni|cluster");
  ds->add_option("--n", da.n, "Number of qubits");
  ds->add_option("--grid", da.grid, "Sweep axis name=lo:hi:count (up to two)");
  ds->add_option("--j1", da.j1);
  ds->add_option("--j2", da.j2);
  ds->add_option("--j", da.j);
  ds->add_option("--h1", da.h1);
  ds->add_option("--h2", da.h2);
  ds->add_option("--b", da.b);
  ds->add_option("--shadows", da.shadows, "Shadow records per state (0 = none)");
  ds->add_flag("--exact", da.exact, "Also cache dense statevectors");
  ds->add_option("--seed", da.seed);
  ds->add_option("--out", da.out, "Output directory");
  ds->add_option("--labels-file", da.labels_file, "External labels, one integer per grid point");
  add_manifest(ds, da.manifest_out);

  ShadowsArgs sa;
  auto* sh = app.add_subcommand("shadows", "(Re)sample shadows for a cached dataset");
  sh->add_option("--dataset-manifest", sa.manifest, "Path to manifest.csv")->required();
  sh->add_option("--shots", sa.shots);
  sh->add_option("--seed", sa.seed);
  sh->add_option("--out", sa.out, "Output directory (default: alongside the input)");
  add_manifest(sh, sa.manifest_out);

  FeaturesArgs fa;
  auto* fe = app.add_subcommand("features", "Estimate low-body expectations into a CSV table");
  fe->add_option("--dataset-manifest", fa.manifest, "Path to manifest.csv")->required();
  fe->add_option("--k", fa.k, "Maximum operator bodyness");
  fe->add_option("--window", fa.window, "Contiguous support window (0 = none)");
  fe->add_flag("--exact", fa.exact, "Exact statevector expectations instead of shadows");
  fe->add_option("--ops-file", fa.ops_file, "Explicit operator list, one Pauli per line");
  fe->add_option("--stride", fa.stride, "Keep every stride-th dataset row");
  fe->add_option("--offset", fa.offset, "Row offset for the stride filter");
  fe->add_option("--out", fa.out);
  add_manifest(fe, fa.manifest_out);

  SurrogateArgs ga;
  auto* su = app.add_subcommand("surrogate", "Build the QCNN surrogate model file");
  su->add_option("--n", ga.n);
  su->add_option("--style", ga.style, "brick|noncrossing");
  su->add_option("--task", ga.task, "binary|fourclass");
  su->add_option("--k", ga.k, "Maximum Pauli weight kept during propagation");
  su->add_option("--freq", ga.freq, "Maximum path frequency");
  su->add_option("--out", ga.out);
  add_manifest(su, ga.manifest_out);

  SelectArgs la;
  auto* se = app.add_subcommand("select", "Variance-rank and keep the top-M active operators");
  se->add_option("--model", la.model)->required();
  se->add_option("--features", la.features)->required();
  se->add_option("--M", la.M, "Operator budget per readout graph");
  se->add_option("--window", la.window);
  se->add_option("--out", la.out, "Output model file (default: in place)");
  add_manifest(se, la.manifest_out);

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Optimize the surrogate parameters");
  tr->add_option("--model", ta.model)->required();
  tr->add_option("--features", ta.features)->required();
  tr->add_option("--loss", ta.loss, "cross-entropy|mse");
  tr->add_option("--iters", ta.iters);
  tr->add_option("--restarts", ta.restarts);
  tr->add_option("--seed", ta.seed);
  tr->add_option("--memory", ta.memory);
  tr->add_option("--tol", ta.tol);
  tr->add_option("--init-scale", ta.init_scale);
  tr->add_option("--out", ta.out, "Output model file (default: in place)");
  tr->add_option("--metrics", ta.metrics, "Per-iteration metrics CSV");
  add_manifest(tr, ta.manifest_out);

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Accuracy and confusion matrix on a feature table");
  ev->add_option("--model", ea.model)->required();
  ev->add_option("--features", ea.features)->required();
  ev->add_option("--out", ea.out, "Result CSV");
  add_manifest(ev, ea.manifest_out);

  PurityArgs pa;
  auto* pu = app.add_subcommand("purity", "Haar-averaged bodyness distribution of the QCNN");
  pu->add_option("--method", pa.method, "recursive|network|mc");
  pu->add_option("--layers", pa.layers, "Layers for the recursive method");
  pu->add_option("--n", pa.n, "Qubits for network/mc (default 2^layers)");
  pu->add_option("--style", pa.style, "brick|noncrossing");
  pu->add_option("--qubit", pa.qubit, "Observable qubit (default: readout)");
  pu->add_option("--samples", pa.samples, "Monte-Carlo samples");
  pu->add_option("--seed", pa.seed);
  pu->add_option("--out", pa.out);
  add_manifest(pu, pa.manifest_out);

  CheckArgs ca;
  auto* ch = app.add_subcommand("check", "Oracle-equivalence self test (nonzero exit on failure)");
  ch->add_option("--n", ca.n);
  ch->add_option("--trials", ca.trials);
  ch->add_option("--seed", ca.seed);
  add_manifest(ch, ca.manifest_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ds->parsed()) {
      if (da.manifest_out.empty()) da.manifest_out = da.out + "/run.manifest";
      write_run_manifest(app, da.manifest_out);
      return run_dataset(da);
    }
    if (sh->parsed()) {
      write_run_manifest(app, sa.manifest_out);
      return run_shadows(sa);
    }
    if (fe->parsed()) {
      if (fa.manifest_out.empty()) fa.manifest_out = fa.out + ".manifest";
      write_run_manifest(app, fa.manifest_out);
      return run_features(fa);
    }
    if (su->parsed()) {
      if (ga.manifest_out.empty()) ga.manifest_out = ga.out + ".manifest";
      write_run_manifest(app, ga.manifest_out);
      return run_surrogate(ga);
    }
    if (se->parsed()) {
      write_run_manifest(app, la.manifest_out);
      return run_select(la);
    }
    if (tr->parsed()) {
      write_run_manifest(app, ta.manifest_out);
      return run_train(ta);
    }
    if (ev->parsed()) {
      write_run_manifest(app, ea.manifest_out);
      return run_eval(ea);
    }
    if (pu->parsed()) {
      if (pa.manifest_out.empty()) pa.manifest_out = pa.out + ".manifest";
      write_run_manifest(app, pa.manifest_out);
      return run_purity(pa);
    }
    if (ch->parsed()) {
      write_run_manifest(app, ca.manifest_out);
      return run_check(ca);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
