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

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lowpp/circuit.hpp"
#include "lowpp/shadows.hpp"
#include "lowpp/surrogate.hpp"

namespace lowpp {

/// A trainable QCNN classifier evaluated through its surrogate graphs: one
/// graph (and one active leaf set) per readout observable.
struct Model {
  uint32_t n = 0;
  LayoutStyle style = LayoutStyle::kNonCrossing;
  Task task = Task::kBinary;
  TruncationPolicy policy;
  Circuit circuit;
  QcnnLayout layout;
  std::vector<PauliString> observables;
  std::vector<SurrogateGraph> graphs;
  std::vector<ActiveSet> active;
  std::vector<double> theta;
};

/// Builds the QCNN, its readout observables, and one surrogate graph per
/// observable (active sets default to all leaves, theta to zero).
Model build_model(uint32_t n, LayoutStyle style, Task task, const TruncationPolicy& policy);

/// Replaces every graph's active set with the top-M variance selection
/// (optionally window-filtered) against the given features.
void select_model_active(Model& model, const FeatureTable& features, size_t M,
                         uint32_t window = 0);

struct TrainConfig {
  enum class Loss { kCrossEntropy, kMse };
  Loss loss = Loss::kCrossEntropy;
  size_t max_iterations = 200;
  size_t restarts = 5;
  uint64_t seed = 0;
  size_t memory = 10;  // quasi-Newton history depth
  double tolerance = 1e-8;
  double init_scale = 0.1 * M_PI;
};

using FeatureRow = std::unordered_map<PauliString, double, PauliStringHash>;

/// p(class 1) = (1 + <Z_out>)/2 with the expectation clipped to [-1, 1].
double predict_binary(const Model& model, const FeatureRow& row);

/// P(b1 b2) from <Z_a>, <Z_b>, <Z_a Z_b>, clipped at zero and renormalized.
/// Class order: 00, 01, 10, 11.
std::vector<double> predict_multiclass(const Model& model, const FeatureRow& row);

/// Dataset loss. Binary cross-entropy uses labels {0,1} and a probability
/// floor of 1e-9; MSE uses targets +-1 against the raw expectation (binary
/// tasks only). Multiclass cross-entropy uses -log P(true class).
double loss(const std::vector<double>& predictions, const std::vector<int>& labels,
            TrainConfig::Loss kind);

/// Dataset loss at the given angles and, if grad is non-null, its exact
/// reverse-mode gradient (one backward pass per surrogate graph).
double loss_with_gradient(const Model& model, const FeatureTable& features,
                          const std::vector<double>& theta, TrainConfig::Loss kind,
                          std::vector<double>* grad);

struct TrainResult {
  std::vector<double> theta;
  std::vector<double> loss_history;  // per accepted iteration, best restart
  std::vector<double> acc_history;
  double final_loss = 0;
  double train_accuracy = 0;
  std::vector<double> restart_losses;
  size_t line_search_failures = 0;
};

/// Limited-memory quasi-Newton descent on the surrogate loss with restarts;
/// the best restart's parameters are written back into model.theta.
TrainResult train(Model& model, const FeatureTable& features, const TrainConfig& config);

struct Evaluation {
  double accuracy = 0;
  /// confusion[true_label][predicted_label]
  std::vector<std::vector<size_t>> confusion;
};

Evaluation evaluate(const Model& model, const FeatureTable& features);

struct DirectClassifier {
  std::vector<PauliString> ops;
  std::vector<double> coeffs;  // aligned with ops
  double intercept = 0;
  double train_accuracy = 0;
};

/// Ridge-regularized least squares of +-1 labels on the raw feature columns
/// (binary tasks): the best low-body observable realized directly in
/// coefficient space. lambda must be positive.
DirectClassifier lowbody_direct_classifier(const FeatureTable& features, double lambda);

double direct_accuracy(const DirectClassifier& clf, const FeatureTable& features);

/// JSON model file: structure, policy, theta, and per-graph active operator
/// lists; load rebuilds the graphs and restores the active sets.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

/// CSV with columns iteration,loss,train_acc.
void save_metrics(const TrainResult& result, const std::string& path);

}  // namespace lowpp
