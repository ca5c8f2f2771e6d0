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

#include "ccbf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ccbf/error.hpp"
#include "ccbf/random.hpp"

namespace ccbf {
namespace {

constexpr double kZeroNorm = 1e-30;

// Row-major flattening for on-disk blobs.
void append_row_major(std::vector<double>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
}

void read_row_major(const std::vector<double>& in, std::size_t& pos, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in[pos++];
  }
}

}  // namespace

RffLayer rff_init(int input_dim, int features, double lengthscale,
                  std::uint64_t seed) {
  if (!(lengthscale > 0.0)) throw InvalidArgument("rff_init: lengthscale must be > 0");
  if (input_dim < 1 || features < 1) throw InvalidArgument("rff_init: sizes must be >= 1");
  Rng rng(seed);
  RffLayer layer;
  layer.lengthscale = lengthscale;
  layer.omega.resize(features, input_dim);
  for (int f = 0; f < features; ++f) {
    for (int d = 0; d < input_dim; ++d) layer.omega(f, d) = rng.normal() / lengthscale;
  }
  layer.bias.resize(features);
  for (int f = 0; f < features; ++f) layer.bias[f] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return layer;
}

Eigen::VectorXd rff_features(const RffLayer& layer,
                             const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != layer.input_dim()) throw InvalidArgument("rff_features: input size mismatch");
  const double scale = std::sqrt(2.0 / layer.features());
  return scale * (layer.omega * z + layer.bias).array().cos().matrix();
}

Eigen::MatrixXd rff_forward(const RffLayer& layer, const Eigen::MatrixXd& z) {
  if (z.rows() != layer.input_dim()) throw InvalidArgument("rff_forward: input size mismatch");
  const double scale = std::sqrt(2.0 / layer.features());
  Eigen::MatrixXd arg = layer.omega * z;
  arg.colwise() += layer.bias;
  return scale * arg.array().cos().matrix();
}

std::vector<int> MlpParams::sizes() const {
  std::vector<int> s;
  if (layers.empty()) return s;
  s.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& l : layers) s.push_back(static_cast<int>(l.weight.rows()));
  return s;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  for (const auto& l : layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

MlpParams mlp_init(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw InvalidArgument("mlp_init: need at least input and output sizes");
  Rng rng(seed);
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    if (in < 1 || out < 1) throw InvalidArgument("mlp_init: layer sizes must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int i = 0; i < out; ++i) {
      for (int j = 0; j < in; ++j) layer.weight(i, j) = rng.uniform(-bound, bound);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            MlpCache* cache) {
  if (params.layers.empty()) throw InvalidArgument("mlp_forward: no layers");
  if (x.rows() != params.layers.front().weight.cols()) {
    throw InvalidArgument("mlp_forward: input has " + std::to_string(x.rows()) +
                          " rows, expected " +
                          std::to_string(params.layers.front().weight.cols()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd a = x;
  const std::size_t L = params.layers.size();
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    a = (l + 1 < L) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

MlpParams backward(const MlpParams& params, const MlpCache& cache,
                   const Eigen::MatrixXd& upstream) {
  const std::size_t L = params.layers.size();
  if (cache.inputs.size() != L || cache.pre.size() != L) {
    throw InvalidArgument("backward: cache does not match the network");
  }
  MlpParams grads = params.zeros_like();
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = L; l-- > 0;) {
    grads.layers[l].weight.noalias() = delta * cache.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = params.layers[l].weight.transpose() * delta;
      // ReLU'(z) = 1 for z > 0, else 0.
      delta = back.cwiseProduct(
          (cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossAndGrad correlation_loss(const Eigen::MatrixXd& raw,
                             const Eigen::MatrixXcd& targets) {
  const Eigen::Index A = targets.rows();
  const Eigen::Index n = targets.cols();
  if (raw.rows() != 2 * A || raw.cols() != n) {
    throw InvalidArgument("correlation_loss: raw outputs must be 2A x batch");
  }
  if (n == 0) throw InvalidArgument("correlation_loss: empty batch");
  LossAndGrad out;
  out.grad.resize(2 * A, n);
  std::vector<double> etas(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto u = raw.col(k).head(A);
    const auto v = raw.col(k).tail(A);
    const auto g = targets.col(k);
    const double q = u.squaredNorm() + v.squaredNorm();
    if (std::sqrt(q) < kZeroNorm) {
      throw ZeroPrecoder("correlation_loss: zero precoder at batch index " + std::to_string(k),
                         static_cast<std::size_t>(k));
    }
    const double gg = g.squaredNorm();
    if (std::sqrt(gg) < kZeroNorm) {
      throw ZeroChannel("correlation_loss: zero target at batch index " + std::to_string(k),
                        static_cast<std::size_t>(k));
    }
    // c = w^H g with w = u + j v.
    std::complex<double> c = 0.0;
    for (Eigen::Index a = 0; a < A; ++a) {
      c += std::complex<double>(u[a], -v[a]) * g[a];
    }
    const double c2 = std::norm(c);
    etas[static_cast<std::size_t>(k)] = c2 / (q * gg);
    // d eta / d u_a = (2 Re(conj(c) g_a) q - 2 |c|^2 u_a) / (q^2 |g|^2),
    // d eta / d v_a likewise with Im and v_a.
    const double denom = q * q * gg;
    for (Eigen::Index a = 0; a < A; ++a) {
      const std::complex<double> t = std::conj(c) * g[a];
      out.grad(a, k) = -inv_n * (2.0 * t.real() * q - 2.0 * c2 * u[a]) / denom;
      out.grad(A + a, k) = -inv_n * (2.0 * t.imag() * q - 2.0 * c2 * v[a]) / denom;
    }
  }
  out.loss = 1.0 - pairwise_sum(etas) * inv_n;
  return out;
}

AdamState AdamState::for_params(const MlpParams& params, const TrainConfig& config) {
  AdamState s;
  s.learning_rate = config.learning_rate;
  s.beta1 = config.beta1;
  s.beta2 = config.beta2;
  s.epsilon = config.epsilon;
  s.first = params.zeros_like();
  s.second = params.zeros_like();
  return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads) {
  if (grads.layers.size() != params.layers.size() ||
      state.first.layers.size() != params.layers.size()) {
    throw InvalidArgument("adam_step: shape mismatch");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= state.learning_rate * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight,
           state.first.layers[l].weight, state.second.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias,
           state.first.layers[l].bias, state.second.layers[l].bias);
  }
}

Eigen::MatrixXd LbbModel::predict(const Eigen::MatrixXd& inputs) const {
  return mlp_forward(mlp, rff_forward(rff, inputs));
}

LbbModel make_lbb_model(int input_dim, int antennas, double lengthscale,
                        const TrainConfig& config) {
  if (config.hidden_layers < 0 || config.hidden_width < 1) {
    throw InvalidArgument("make_lbb_model: bad hidden layer configuration");
  }
  LbbModel m;
  m.rff = rff_init(input_dim, config.features, lengthscale, config.rff_seed);
  std::vector<int> sizes{config.features};
  for (int i = 0; i < config.hidden_layers; ++i) sizes.push_back(config.hidden_width);
  sizes.push_back(2 * antennas);
  m.mlp = mlp_init(sizes, config.init_seed);
  return m;
}

double median_pairwise_distance(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.cols();
  if (n < 2) throw InvalidArgument("median_pairwise_distance: need >= 2 points");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((points.col(i) - points.col(j)).norm());
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  const double upper = d[mid];
  if (d.size() % 2 == 1) return upper;
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double resolve_lengthscale(const Eigen::MatrixXd& inputs, const TrainConfig& config) {
  if (config.lengthscale) return *config.lengthscale;
  const double ls = config.lengthscale_factor * median_pairwise_distance(inputs);
  if (!(ls > 0.0)) throw NumericalError("lengthscale from training inputs is zero");
  return ls;
}

TrainResult train(LbbModel model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXcd& targets, const TrainConfig& config) {
  const Eigen::Index n = inputs.cols();
  if (targets.cols() != n) throw InvalidArgument("train: inputs and targets differ in count");
  if (n == 0) throw InvalidArgument("train: empty training set");
  if (config.batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (config.epochs < 0) throw InvalidArgument("train: epochs must be >= 0");

  TrainResult result;
  const Eigen::MatrixXd features = rff_forward(model.rff, inputs);
  result.initial_loss = correlation_loss(mlp_forward(model.mlp, features), targets).loss;

  AdamState adam = AdamState::for_params(model.mlp, config);
  Rng rng(config.shuffle_seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MlpCache cache;
  const Eigen::Index B = config.batch_size;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    std::vector<double> weighted;
    int batch_index = 0;
    for (Eigen::Index start = 0; start < n; start += B, ++batch_index) {
      const Eigen::Index len = std::min(B, n - start);
      Eigen::MatrixXd xb(features.rows(), len);
      Eigen::MatrixXcd gb(targets.rows(), len);
      for (Eigen::Index k = 0; k < len; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + k)];
        xb.col(k) = features.col(src);
        gb.col(k) = targets.col(src);
      }
      const Eigen::MatrixXd out = mlp_forward(model.mlp, xb, &cache);
      LossAndGrad lg = correlation_loss(out, gb);
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
        throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(batch_index),
                            epoch, batch_index);
      }
      if (lg.loss < -1e-12 || lg.loss > 1.0 + 1e-12) {
        throw NumericalError("loss " + std::to_string(lg.loss) + " outside [0, 1] at epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      weighted.push_back(lg.loss * static_cast<double>(len));
      adam_step(adam, model.mlp, backward(model.mlp, cache, lg.grad));
    }
    result.loss_history.push_back(pairwise_sum(weighted) / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

void save_model(const LbbModel& model, const Json& extra, const fs::path& dir) {
  ensure_directory(dir);
  std::vector<double> blob;
  blob.reserve(model.mlp.parameter_count() +
               static_cast<std::size_t>(model.rff.omega.size() + model.rff.bias.size()));
  append_row_major(blob, model.rff.omega);
  for (Eigen::Index f = 0; f < model.rff.bias.size(); ++f) blob.push_back(model.rff.bias[f]);
  for (const auto& l : model.mlp.layers) {
    append_row_major(blob, l.weight);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) blob.push_back(l.bias[i]);
  }
  write_f64(dir / "params.f64", blob);

  Json m = extra;
  m["format"] = "ccbf-model";
  m["version"] = 1;
  m["endianness"] = "little";
  m["input_dim"] = model.input_dim();
  m["features"] = model.rff.features();
  m["lengthscale"] = model.rff.lengthscale;
  m["layer_sizes"] = model.mlp.sizes();
  m["parameter_order"] = "rff.omega (FxD), rff.bias (F), then per layer weight (out x in), bias; row-major";
  m["parameter_count"] = blob.size();
  write_json(dir / "manifest.json", m);
}

LbbModel load_model(const fs::path& dir, Json* manifest) {
  const Json m = read_json(dir / "manifest.json");
  if (m.value("format", "") != "ccbf-model") throw IoError(dir.string() + ": not a ccbf model");
  const int D = m.at("input_dim").get<int>();
  const int F = m.at("features").get<int>();
  const auto sizes = m.at("layer_sizes").get<std::vector<int>>();
  if (sizes.size() < 2 || sizes.front() != F) throw IoError(dir.string() + ": inconsistent layer sizes");
  const std::size_t count = m.at("parameter_count").get<std::size_t>();
  const auto blob = read_f64(dir / "params.f64", count);

  LbbModel model;
  model.rff.lengthscale = m.at("lengthscale").get<double>();
  model.rff.omega.resize(F, D);
  model.rff.bias.resize(F);
  std::size_t pos = 0;
  std::size_t expected = static_cast<std::size_t>(F) * D + F;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    expected += static_cast<std::size_t>(sizes[l + 1]) * (sizes[l] + 1);
  }
  if (expected != count) throw IoError(dir.string() + ": parameter count mismatch");
  read_row_major(blob, pos, model.rff.omega);
  for (int f = 0; f < F; ++f) model.rff.bias[f] = blob[pos++];
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer{Eigen::MatrixXd(sizes[l + 1], sizes[l]), Eigen::VectorXd(sizes[l + 1])};
    read_row_major(blob, pos, layer.weight);
    for (int i = 0; i < sizes[l + 1]; ++i) layer.bias[i] = blob[pos++];
    model.mlp.layers.push_back(std::move(layer));
  }
  if (manifest) *manifest = m;
  return model;
}

}  // namespace ccbf
