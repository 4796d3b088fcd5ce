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

#include "lowpp/learn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "lowpp/rng.hpp"

namespace lowpp {

namespace {

constexpr double kProbFloor = 1e-9;

size_t n_classes(Task task) { return task == Task::kBinary ? 2 : 4; }

// Per-graph feature matrices aligned with the active leaf lists, so the
// training loop never touches Pauli keys in its inner loops.
struct Batch {
  size_t S = 0;
  std::vector<int> labels;
  std::vector<std::vector<double>> feat;  // feat[g][s * A_g + j]
};

Batch bind_features(const Model& model, const FeatureTable& features) {
  Batch b;
  b.S = features.rows.size();
  b.labels = features.labels;
  b.feat.resize(model.graphs.size());
  for (size_t g = 0; g < model.graphs.size(); ++g) {
    const auto& graph = model.graphs[g];
    const auto& active = model.active[g];
    const size_t A = active.leaf_indices.size();
    std::vector<int> cols(A);
    for (size_t j = 0; j < A; ++j) {
      const auto& p = graph.leaves[active.leaf_indices[j]].pauli;
      int c = features.column_index(p);
      if (c < 0)
        throw std::invalid_argument("bind_features: feature table lacks operator " +
                                    p.to_text());
      cols[j] = c;
    }
    b.feat[g].resize(b.S * A);
    for (size_t s = 0; s < b.S; ++s)
      for (size_t j = 0; j < A; ++j) b.feat[g][s * A + j] = features.rows[s][cols[j]];
  }
  return b;
}

// Expectation of each readout observable on each sample at the given angles.
std::vector<std::vector<double>> batch_expectations(const Model& model, const Batch& batch,
                                                    const std::vector<double>& theta,
                                                    std::vector<std::vector<double>>* values_out) {
  std::vector<std::vector<double>> e(model.graphs.size());
  for (size_t g = 0; g < model.graphs.size(); ++g) {
    const auto& graph = model.graphs[g];
    const auto& active = model.active[g];
    const size_t A = active.leaf_indices.size();
    auto values = surrogate_forward(graph, active, theta);
    std::vector<double> coeff(A);
    for (size_t j = 0; j < A; ++j) coeff[j] = values[graph.leaves[active.leaf_indices[j]].node];
    e[g].resize(batch.S);
    for (size_t s = 0; s < batch.S; ++s) {
      double acc = 0;
      const double* row = batch.feat[g].data() + s * A;
      for (size_t j = 0; j < A; ++j) acc += row[j] * coeff[j];
      e[g][s] = acc;
    }
    if (values_out) (*values_out)[g] = std::move(values);
  }
  return e;
}

// Raw (pre-clip) bitstring weights q_b, b = b1*2 + b2, from the three
// readout expectations <Z_a>, <Z_b>, <Z_a Z_b>. They sum to 1 exactly.
std::array<double, 4> bitstring_weights(double ea, double eb, double eab) {
  std::array<double, 4> q;
  for (int b = 0; b < 4; ++b) {
    double s1 = (b & 2) ? -1.0 : 1.0;
    double s2 = (b & 1) ? -1.0 : 1.0;
    q[b] = (1.0 + s1 * ea + s2 * eb + s1 * s2 * eab) / 4.0;
  }
  return q;
}

int predicted_class(const Model& model, const std::vector<std::vector<double>>& e, size_t s) {
  if (model.task == Task::kBinary) return e[0][s] >= 0.0 ? 1 : 0;
  auto q = bitstring_weights(e[0][s], e[1][s], e[2][s]);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

double batch_accuracy(const Model& model, const Batch& batch,
                      const std::vector<std::vector<double>>& e) {
  if (batch.S == 0) return 0.0;
  size_t hits = 0;
  for (size_t s = 0; s < batch.S; ++s) hits += predicted_class(model, e, s) == batch.labels[s];
  return static_cast<double>(hits) / static_cast<double>(batch.S);
}

// Loss and, when grad != nullptr, its gradient in theta via one reverse pass
// per surrogate graph. Returns the loss; fills *acc with training accuracy.
double batch_loss_grad(const Model& model, const Batch& batch, const std::vector<double>& theta,
                       TrainConfig::Loss kind, std::vector<double>* grad, double* acc) {
  const size_t S = batch.S;
  if (S == 0) throw std::invalid_argument("batch_loss_grad: empty dataset");
  std::vector<std::vector<double>> values(model.graphs.size());
  auto e = batch_expectations(model, batch, theta, grad ? &values : nullptr);
  if (acc) *acc = batch_accuracy(model, batch, e);

  // dL/de per graph per sample, including the 1/S normalization.
  std::vector<std::vector<double>> de(model.graphs.size(), std::vector<double>(S, 0.0));
  const double inv = 1.0 / static_cast<double>(S);
  double total = 0;

  if (model.task == Task::kBinary) {
    for (size_t s = 0; s < S; ++s) {
      const double ee = e[0][s];
      const int y = batch.labels[s];
      if (kind == TrainConfig::Loss::kMse) {
        const double t = y ? 1.0 : -1.0;
        total += (t - ee) * (t - ee) * inv;
        de[0][s] = -2.0 * (t - ee) * inv;
      } else {
        const double ec = std::clamp(ee, -1.0, 1.0);
        const double p = std::clamp((1.0 + ec) / 2.0, kProbFloor, 1.0 - kProbFloor);
        total += -(y ? std::log(p) : std::log(1.0 - p)) * inv;
        if (std::abs(ee) < 1.0)
          de[0][s] = (y ? -1.0 / p : 1.0 / (1.0 - p)) * 0.5 * inv;
      }
    }
  } else {
    if (kind == TrainConfig::Loss::kMse)
      throw std::invalid_argument("batch_loss_grad: MSE is defined for binary tasks only");
    for (size_t s = 0; s < S; ++s) {
      const int y = batch.labels[s];
      if (y < 0 || y > 3) throw std::invalid_argument("batch_loss_grad: four-class label out of range");
      auto q = bitstring_weights(e[0][s], e[1][s], e[2][s]);
      std::array<double, 4> m;
      double Z = 0;
      for (int b = 0; b < 4; ++b) Z += m[b] = std::max(q[b], 0.0);
      const double Py = std::max(m[y] / Z, kProbFloor);
      total += -std::log(Py) * inv;
      const double dLdPy = -inv / Py;
      for (int c = 0; c < 4; ++c) {
        if (q[c] <= 0.0) continue;  // clipped: no gradient through this weight
        const double dPydmc = ((c == y ? Z : 0.0) - m[y]) / (Z * Z);
        const double w = dLdPy * dPydmc / 4.0;
        const double s1 = (c & 2) ? -1.0 : 1.0;
        const double s2 = (c & 1) ? -1.0 : 1.0;
        de[0][s] += w * s1;
        de[1][s] += w * s2;
        de[2][s] += w * s1 * s2;
      }
    }
  }

  if (grad) {
    grad->assign(model.circuit.n_params, 0.0);
    for (size_t g = 0; g < model.graphs.size(); ++g) {
      const auto& active = model.active[g];
      const size_t A = active.leaf_indices.size();
      std::vector<double> leaf_adj(A, 0.0);
      for (size_t s = 0; s < S; ++s) {
        const double a = de[g][s];
        if (a == 0.0) continue;
        const double* row = batch.feat[g].data() + s * A;
        for (size_t j = 0; j < A; ++j) leaf_adj[j] += a * row[j];
      }
      auto gg = surrogate_backward(model.graphs[g], active, theta, values[g], leaf_adj);
      for (size_t i = 0; i < gg.size(); ++i) (*grad)[i] += gg[i];
    }
  }
  return total;
}

struct DescentOut {
  std::vector<double> theta;
  std::vector<double> loss_hist;
  std::vector<double> acc_hist;
  double final_loss = 0;
  bool line_search_failed = false;
};

// Limited-memory BFGS with Armijo backtracking. History entries are the
// accepted iterates, so the recorded losses are non-increasing.
DescentOut lbfgs_descent(const Model& model, const Batch& batch, std::vector<double> x,
                         const TrainConfig& config) {
  const size_t dim = x.size();
  DescentOut out;
  std::vector<double> g;
  double acc = 0;
  double f = batch_loss_grad(model, batch, x, config.loss, &g, &acc);
  out.loss_hist.push_back(f);
  out.acc_hist.push_back(acc);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
  std::vector<double> d(dim), xn(dim), gn(dim);

  for (size_t iter = 0; iter < config.max_iterations; ++iter) {
    double gmax = 0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < config.tolerance) break;

    // Two-loop recursion over the stored curvature pairs.
    d = g;
    for (double& v : d) v = -v;
    std::vector<double> alpha(pairs.size());
    for (size_t i = pairs.size(); i-- > 0;) {
      const auto& [si, yi] = pairs[i];
      double sy = 0, sd = 0;
      for (size_t k = 0; k < dim; ++k) sy += si[k] * yi[k];
      for (size_t k = 0; k < dim; ++k) sd += si[k] * d[k];
      alpha[i] = sd / sy;
      for (size_t k = 0; k < dim; ++k) d[k] -= alpha[i] * yi[k];
    }
    if (!pairs.empty()) {
      const auto& [sl, yl] = pairs.back();
      double sy = 0, yy = 0;
      for (size_t k = 0; k < dim; ++k) {
        sy += sl[k] * yl[k];
        yy += yl[k] * yl[k];
      }
      for (double& v : d) v *= sy / yy;
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
      const auto& [si, yi] = pairs[i];
      double sy = 0, yd = 0;
      for (size_t k = 0; k < dim; ++k) sy += si[k] * yi[k];
      for (size_t k = 0; k < dim; ++k) yd += yi[k] * d[k];
      double beta = yd / sy;
      for (size_t k = 0; k < dim; ++k) d[k] += (alpha[i] - beta) * si[k];
    }

    double gd = 0;
    for (size_t k = 0; k < dim; ++k) gd += g[k] * d[k];
    if (gd >= 0) {  // not a descent direction; fall back to steepest descent
      d = g;
      for (double& v : d) v = -v;
      gd = 0;
      for (size_t k = 0; k < dim; ++k) gd += g[k] * d[k];
      pairs.clear();
    }

    double step = pairs.empty() ? std::min(1.0, 1.0 / std::max(1.0, gmax)) : 1.0;
    double fn = f;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (size_t k = 0; k < dim; ++k) xn[k] = x[k] + step * d[k];
      fn = batch_loss_grad(model, batch, xn, config.loss, nullptr, nullptr);
      if (fn <= f + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }

    double accn = 0;
    fn = batch_loss_grad(model, batch, xn, config.loss, &gn, &accn);
    std::vector<double> sv(dim), yv(dim);
    double sy = 0, snorm = 0, ynorm = 0;
    for (size_t k = 0; k < dim; ++k) {
      sv[k] = xn[k] - x[k];
      yv[k] = gn[k] - g[k];
      sy += sv[k] * yv[k];
      snorm += sv[k] * sv[k];
      ynorm += yv[k] * yv[k];
    }
    if (sy > 1e-12 * std::sqrt(snorm * ynorm)) {
      pairs.emplace_back(std::move(sv), std::move(yv));
      if (pairs.size() > config.memory) pairs.pop_front();
    }

    const double drop = f - fn;
    x = xn;
    g = gn;
    f = fn;
    out.loss_hist.push_back(f);
    out.acc_hist.push_back(accn);
    if (drop < config.tolerance * std::max(1.0, std::abs(f))) break;
  }

  out.theta = std::move(x);
  out.final_loss = f;
  return out;
}

std::string style_name(LayoutStyle s) {
  return s == LayoutStyle::kBrick ? "brick" : "noncrossing";
}
LayoutStyle style_from_name(const std::string& s) {
  if (s == "brick") return LayoutStyle::kBrick;
  if (s == "noncrossing") return LayoutStyle::kNonCrossing;
  throw std::invalid_argument("unknown layout style: " + s);
}
std::string task_name(Task t) { return t == Task::kBinary ? "binary" : "fourclass"; }
Task task_from_name(const std::string& s) {
  if (s == "binary") return Task::kBinary;
  if (s == "fourclass") return Task::kFourClass;
  throw std::invalid_argument("unknown task: " + s);
}

}  // namespace

Model build_model(uint32_t n, LayoutStyle style, Task task, const TruncationPolicy& policy) {
  Model m;
  m.n = n;
  m.style = style;
  m.task = task;
  m.policy = policy;
  std::tie(m.circuit, m.layout) = build_qcnn(n, style);
  m.observables = readout_observables(m.layout, task);
  for (const auto& obs : m.observables) {
    PauliSum sum;
    sum.add(obs, 1.0);
    m.graphs.push_back(surrogate_build(m.circuit, sum, policy));
    m.active.push_back(all_leaves(m.graphs.back()));
  }
  m.theta.assign(m.circuit.n_params, 0.0);
  return m;
}

void select_model_active(Model& model, const FeatureTable& features, size_t M, uint32_t window) {
  for (size_t g = 0; g < model.graphs.size(); ++g)
    model.active[g] = select_active(model.graphs[g], features, M, window);
}

double predict_binary(const Model& model, const FeatureRow& row) {
  if (model.task != Task::kBinary)
    throw std::invalid_argument("predict_binary: model is not a binary classifier");
  double e = surrogate_evaluate(model.graphs[0], model.active[0], model.theta, row);
  return (1.0 + std::clamp(e, -1.0, 1.0)) / 2.0;
}

std::vector<double> predict_multiclass(const Model& model, const FeatureRow& row) {
  if (model.task != Task::kFourClass)
    throw std::invalid_argument("predict_multiclass: model is not a four-class classifier");
  double e[3];
  for (int g = 0; g < 3; ++g)
    e[g] = surrogate_evaluate(model.graphs[g], model.active[g], model.theta, row);
  auto q = bitstring_weights(e[0], e[1], e[2]);
  double Z = 0;
  std::vector<double> p(4);
  for (int b = 0; b < 4; ++b) Z += p[b] = std::max(q[b], 0.0);
  for (double& v : p) v /= Z;
  return p;
}

double loss(const std::vector<double>& predictions, const std::vector<int>& labels,
            TrainConfig::Loss kind) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw std::invalid_argument("loss: size mismatch or empty input");
  double total = 0;
  for (size_t s = 0; s < predictions.size(); ++s) {
    const int y = labels[s];
    if (kind == TrainConfig::Loss::kMse) {
      const double t = y ? 1.0 : -1.0;
      const double e = 2.0 * predictions[s] - 1.0;
      total += (t - e) * (t - e);
    } else {
      const double p = std::clamp(predictions[s], kProbFloor, 1.0 - kProbFloor);
      total += -(y ? std::log(p) : std::log(1.0 - p));
    }
  }
  return total / static_cast<double>(predictions.size());
}

double loss_with_gradient(const Model& model, const FeatureTable& features,
                          const std::vector<double>& theta, TrainConfig::Loss kind,
                          std::vector<double>* grad) {
  Batch batch = bind_features(model, features);
  return batch_loss_grad(model, batch, theta, kind, grad, nullptr);
}

TrainResult train(Model& model, const FeatureTable& features, const TrainConfig& config) {
  if (config.restarts == 0) throw std::invalid_argument("train: need at least one restart");
  Batch batch = bind_features(model, features);

  TrainResult best;
  best.final_loss = std::numeric_limits<double>::infinity();
  for (size_t r = 0; r < config.restarts; ++r) {
    Rng rng(substream_seed(config.seed, "init", r));
    std::vector<double> theta0(model.circuit.n_params);
    for (double& v : theta0) v = rng.uniform(-config.init_scale, config.init_scale);
    auto out = lbfgs_descent(model, batch, std::move(theta0), config);
    best.restart_losses.push_back(out.final_loss);
    best.line_search_failures += out.line_search_failed;
    if (out.final_loss < best.final_loss) {
      best.final_loss = out.final_loss;
      best.theta = std::move(out.theta);
      best.loss_history = std::move(out.loss_hist);
      best.acc_history = std::move(out.acc_hist);
    }
  }
  model.theta = best.theta;
  best.train_accuracy = best.acc_history.empty() ? 0.0 : best.acc_history.back();
  return best;
}

Evaluation evaluate(const Model& model, const FeatureTable& features) {
  Batch batch = bind_features(model, features);
  auto e = batch_expectations(model, batch, model.theta, nullptr);
  Evaluation ev;
  const size_t C = n_classes(model.task);
  ev.confusion.assign(C, std::vector<size_t>(C, 0));
  size_t hits = 0;
  for (size_t s = 0; s < batch.S; ++s) {
    int pred = predicted_class(model, e, s);
    int truth = batch.labels[s];
    if (truth < 0 || static_cast<size_t>(truth) >= C)
      throw std::invalid_argument("evaluate: label out of range for the task");
    ev.confusion[truth][pred] += 1;
    hits += pred == truth;
  }
  ev.accuracy = batch.S ? static_cast<double>(hits) / static_cast<double>(batch.S) : 0.0;
  return ev;
}

DirectClassifier lowbody_direct_classifier(const FeatureTable& features, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lowbody_direct_classifier: lambda must be positive");
  const size_t S = features.rows.size();
  const size_t F = features.ops.size();
  if (S == 0 || F == 0) throw std::invalid_argument("lowbody_direct_classifier: empty table");

  Eigen::MatrixXd X(S, F + 1);
  Eigen::VectorXd t(S);
  for (size_t s = 0; s < S; ++s) {
    for (size_t j = 0; j < F; ++j) X(s, j) = features.rows[s][j];
    X(s, F) = 1.0;
    const int y = features.labels[s];
    if (y != 0 && y != 1)
      throw std::invalid_argument("lowbody_direct_classifier: labels must be binary");
    t(s) = y ? 1.0 : -1.0;
  }
  Eigen::MatrixXd A = X.transpose() * X;
  for (size_t j = 0; j < F; ++j) A(j, j) += lambda;  // intercept left unregularized
  Eigen::VectorXd w = A.ldlt().solve(X.transpose() * t);

  DirectClassifier clf;
  clf.ops = features.ops;
  clf.coeffs.assign(w.data(), w.data() + F);
  clf.intercept = w(F);
  size_t hits = 0;
  for (size_t s = 0; s < S; ++s) hits += ((X.row(s) * w)(0) >= 0.0) == (features.labels[s] == 1);
  clf.train_accuracy = static_cast<double>(hits) / static_cast<double>(S);
  return clf;
}

double direct_accuracy(const DirectClassifier& clf, const FeatureTable& features) {
  std::vector<int> cols(clf.ops.size());
  for (size_t j = 0; j < clf.ops.size(); ++j) {
    cols[j] = features.column_index(clf.ops[j]);
    if (cols[j] < 0)
      throw std::invalid_argument("direct_accuracy: feature table lacks operator " +
                                  clf.ops[j].to_text());
  }
  size_t hits = 0;
  for (size_t s = 0; s < features.rows.size(); ++s) {
    double score = clf.intercept;
    for (size_t j = 0; j < cols.size(); ++j) score += clf.coeffs[j] * features.rows[s][cols[j]];
    hits += (score >= 0.0) == (features.labels[s] == 1);
  }
  return features.rows.empty() ? 0.0
                               : static_cast<double>(hits) / static_cast<double>(features.rows.size());
}

void save_model(const Model& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "lowpp-model-v1";
  j["n"] = model.n;
  j["style"] = style_name(model.style);
  j["task"] = task_name(model.task);
  j["policy"] = {{"max_weight", model.policy.max_weight},
                 {"max_frequency", model.policy.max_frequency},
                 {"min_coeff", model.policy.min_coeff}};
  j["theta"] = model.theta;
  nlohmann::json graphs = nlohmann::json::array();
  for (size_t g = 0; g < model.graphs.size(); ++g) {
    nlohmann::json jg;
    jg["observable"] = model.observables[g].to_text();
    nlohmann::json act = nlohmann::json::array();
    for (uint32_t li : model.active[g].leaf_indices)
      act.push_back(model.graphs[g].leaves[li].pauli.to_text());
    jg["active"] = act;
    graphs.push_back(jg);
  }
  j["graphs"] = graphs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(2) << "\n";
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "lowpp-model-v1")
    throw std::runtime_error("load_model: unrecognized format in " + path);

  TruncationPolicy policy;
  policy.max_weight = j["policy"]["max_weight"].get<uint32_t>();
  policy.max_frequency = j["policy"]["max_frequency"].get<uint32_t>();
  policy.min_coeff = j["policy"]["min_coeff"].get<double>();

  Model m = build_model(j["n"].get<uint32_t>(), style_from_name(j["style"].get<std::string>()),
                        task_from_name(j["task"].get<std::string>()), policy);
  m.theta = j["theta"].get<std::vector<double>>();
  if (m.theta.size() != m.circuit.n_params)
    throw std::runtime_error("load_model: parameter count mismatch in " + path);

  const auto& graphs = j["graphs"];
  if (graphs.size() != m.graphs.size())
    throw std::runtime_error("load_model: graph count mismatch in " + path);
  for (size_t g = 0; g < m.graphs.size(); ++g) {
    std::unordered_map<PauliString, uint32_t, PauliStringHash> index;
    for (uint32_t li = 0; li < m.graphs[g].leaves.size(); ++li)
      index.emplace(m.graphs[g].leaves[li].pauli, li);
    std::vector<uint32_t> leaf_indices;
    for (const auto& text : graphs[g]["active"]) {
      auto it = index.find(PauliString::from_text(text.get<std::string>()));
      if (it == index.end())
        throw std::runtime_error("load_model: active operator not present in rebuilt graph");
      leaf_indices.push_back(it->second);
    }
    m.active[g] = make_active(m.graphs[g], std::move(leaf_indices));
  }
  return m;
}

void save_metrics(const TrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_metrics: cannot open " + path);
  out << "iteration,loss,train_acc\n";
  out.precision(17);
  for (size_t i = 0; i < result.loss_history.size(); ++i)
    out << i << "," << result.loss_history[i] << "," << result.acc_history[i] << "\n";
}

}  // namespace lowpp
