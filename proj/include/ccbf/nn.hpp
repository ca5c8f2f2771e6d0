// Copyright 2026 The ccbf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCBF_NN_HPP_
#define CCBF_NN_HPP_

// The location-to-precoder network: a frozen random Fourier feature layer
// followed by a ReLU MLP, trained with Adam on the precoder misalignment
// loss. Gradients are derived by hand for exactly this architecture.
//
// Batches are column-major: one sample per column.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/io.hpp"

namespace ccbf {

struct TrainConfig {
  int features = 600;
  int hidden_width = 300;
  int hidden_layers = 3;
  int epochs = 30;
  int batch_size = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // RFF lengthscale; when unset it is lengthscale_factor times the median
  // pairwise distance between training inputs.
  std::optional<double> lengthscale;
  double lengthscale_factor = 0.2;
  std::uint64_t rff_seed = 11;
  std::uint64_t init_seed = 13;
  std::uint64_t shuffle_seed = 17;
};

struct RffLayer {
  Eigen::MatrixXd omega;  // F x D, frozen
  Eigen::VectorXd bias;   // F, frozen
  double lengthscale = 1.0;

  int features() const { return static_cast<int>(omega.rows()); }
  int input_dim() const { return static_cast<int>(omega.cols()); }
};

// omega ~ N(0, 1/lengthscale^2) drawn in row order, then bias ~ U[0, 2pi).
RffLayer rff_init(int input_dim, int features, double lengthscale,
                  std::uint64_t seed);

// sqrt(2/F) * cos(omega z + bias), for one input and for columns of a batch.
Eigen::VectorXd rff_features(const RffLayer& layer,
                             const Eigen::Ref<const Eigen::VectorXd>& z);
Eigen::MatrixXd rff_forward(const RffLayer& layer, const Eigen::MatrixXd& z);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  // [in, hidden..., out]
  std::vector<int> sizes() const;
  std::size_t parameter_count() const;
  // Same shapes, all zero.
  MlpParams zeros_like() const;
};

// Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)] in row order, biases zero.
MlpParams mlp_init(std::span<const int> sizes, std::uint64_t seed);

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // affine output of each layer
};

// Affine + ReLU on every layer except the last, which is affine only.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            MlpCache* cache = nullptr);

// Reverse mode through the MLP; ReLU'(0) = 0. `upstream` is d loss / d output.
MlpParams backward(const MlpParams& params, const MlpCache& cache,
                   const Eigen::MatrixXd& upstream);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // d loss / d raw outputs, 2A x batch
};

// 1 - mean_n |w_n^H g_n|^2 / (|w_n|^2 |g_n|^2) where w_n[a] = raw[a] +
// j raw[A + a]. Throws ZeroPrecoder / ZeroChannel with the sample index.
LossAndGrad correlation_loss(const Eigen::MatrixXd& raw,
                             const Eigen::MatrixXcd& targets);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  MlpParams first;
  MlpParams second;

  static AdamState for_params(const MlpParams& params, const TrainConfig& config);
};

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads);

struct LbbModel {
  RffLayer rff;
  MlpParams mlp;

  int input_dim() const { return rff.input_dim(); }
  int antennas() const { return mlp.layers.back().weight.rows() / 2; }
  // Raw 2A outputs for a batch of inputs.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;
};

LbbModel make_lbb_model(int input_dim, int antennas, double lengthscale,
                        const TrainConfig& config);

// Median of the pairwise Euclidean distances between columns.
double median_pairwise_distance(const Eigen::MatrixXd& points);

// Lengthscale for a training input set under `config`.
double resolve_lengthscale(const Eigen::MatrixXd& inputs, const TrainConfig& config);

struct TrainResult {
  LbbModel model;
  double initial_loss = 0.0;
  std::vector<double> loss_history;  // mean training loss per epoch
};

// Mini-batch Adam on the correlation loss, reshuffling every epoch.
TrainResult train(LbbModel model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXcd& targets, const TrainConfig& config);

// Sum in index order by recursive halving.
double pairwise_sum(std::span<const double> values);

// Directory with manifest.json and params.f64 (omega, rff bias, then each
// layer's weight and bias; matrices row-major). `extra` is merged into the
// manifest.
void save_model(const LbbModel& model, const Json& extra, const fs::path& dir);
LbbModel load_model(const fs::path& dir, Json* manifest = nullptr);

}  // namespace ccbf

#endif  // CCBF_NN_HPP_
