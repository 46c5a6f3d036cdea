// Copyright 2026 The ser-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <string>

#include "ser/errors.hpp"
#include "ser/model.hpp"
#include "ser/rng.hpp"

namespace ser::model {

namespace {

template <typename T>
ag::Tensor<T> he_normal(ag::Shape shape, std::size_t fan_in, Rng& rng) {
  const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<T> values(ag::numel(shape));
  for (T& v : values) v = static_cast<T>(rng.normal() * std_dev);
  return ag::Tensor<T>::from(std::move(shape), std::move(values), true);
}

template <typename T>
NamedArray snapshot(const std::string& name, const ag::Shape& shape, std::span<const T> values) {
  NamedArray out{name, shape, {}};
  out.values.reserve(values.size());
  for (T v : values) out.values.push_back(static_cast<float>(v));
  return out;
}

}  // namespace

template <typename T>
Model<T>::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::sort(config_.eca.begin(), config_.eca.end());
  Rng rng(seed);

  std::size_t in_ch = 1;
  for (int layer = 1; layer <= kNumBlocks; ++layer) {
    const auto out_ch = static_cast<std::size_t>(config_.channels(layer));
    const std::string idx = std::to_string(layer);
    Block block;
    block.weight = he_normal<T>({out_ch, in_ch, 3, 3}, in_ch * 9, rng);
    block.bias = ag::Tensor<T>::zeros({out_ch}, true);
    block.gamma = ag::Tensor<T>::full({out_ch}, T(1), true);
    block.beta = ag::Tensor<T>::zeros({out_ch}, true);
    block.bn = ag::BatchNormState<T>(out_ch);
    params_.push_back({"conv" + idx + ".weight", block.weight});
    params_.push_back({"conv" + idx + ".bias", block.bias});
    params_.push_back({"bn" + idx + ".gamma", block.gamma});
    params_.push_back({"bn" + idx + ".beta", block.beta});
    if (const EcaPlacement* p = config_.eca_at(layer)) {
      const auto k = static_cast<std::size_t>(p->kernel);
      block.eca = he_normal<T>({1, 1, k}, k, rng);
      params_.push_back({"eca" + idx + ".kernel", block.eca});
    }
    blocks_.push_back(std::move(block));
    in_ch = out_ch;
  }

  const std::size_t width = in_ch;
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  fc1_weight_ = he_normal<T>({width, width}, width, rng);
  fc1_bias_ = ag::Tensor<T>::zeros({width}, true);
  fc2_weight_ = he_normal<T>({classes, width}, width, rng);
  fc2_bias_ = ag::Tensor<T>::zeros({classes}, true);
  params_.push_back({"fc1.weight", fc1_weight_});
  params_.push_back({"fc1.bias", fc1_bias_});
  params_.push_back({"fc2.weight", fc2_weight_});
  params_.push_back({"fc2.bias", fc2_bias_});
}

template <typename T>
ag::Tensor<T> Model<T>::run(const ag::Tensor<T>& batch, ag::Mode mode, std::map<int, ag::Tensor<T>>* scores) {
  const ag::Shape expected{batch.rank() == 4 ? batch.dim(0) : 0, 1, static_cast<std::size_t>(config_.input_time),
                           static_cast<std::size_t>(config_.input_mel)};
  if (batch.shape() != expected) {
    throw InvalidShape("model expects [N,1," + std::to_string(config_.input_time) + "," +
                       std::to_string(config_.input_mel) + "] input, got " + ag::to_string(batch.shape()));
  }

  ag::Tensor<T> x = batch;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    Block& b = blocks_[i];
    x = ag::conv2d(x, b.weight, b.bias, 1, 1);
    x = ag::batchnorm2d(x, b.gamma, b.beta, b.bn, mode);
    x = ag::relu(x);
    if (b.eca.defined()) {
      EcaResult<T> r = eca_forward(x, b.eca);
      if (scores != nullptr) scores->emplace(static_cast<int>(i + 1), r.scores);
      x = r.output;
    }
    x = (i + 1 < blocks_.size()) ? ag::avgpool2d(x) : ag::global_avgpool(x);
  }
  x = ag::relu(ag::linear(x, fc1_weight_, fc1_bias_));
  return ag::linear(x, fc2_weight_, fc2_bias_);
}

template <typename T>
ag::Tensor<T> Model<T>::forward(const ag::Tensor<T>& batch, ag::Mode mode) {
  return run(batch, mode, nullptr);
}

template <typename T>
ag::Tensor<T> Model<T>::extract_eca_scores(const ag::Tensor<T>& batch, int layer) {
  if (config_.eca_at(layer) == nullptr) {
    throw InvalidConfig("layer " + std::to_string(layer) + " has no attention block");
  }
  ag::NoGradGuard no_grad;
  std::map<int, ag::Tensor<T>> scores;
  run(batch, ag::Mode::eval, &scores);
  return scores.at(layer);
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.tensor.numel();
  return total;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
ModelState Model<T>::export_state() const {
  ModelState state;
  state.config = config_;
  for (const auto& p : params_) state.parameters.push_back(snapshot<T>(p.name, p.tensor.shape(), p.tensor.values()));
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    const auto& bn = blocks_[i].bn;
    const ag::Shape shape{bn.running_mean.size()};
    state.buffers.push_back(snapshot<T>("bn" + idx + ".running_mean", shape, std::span<const T>(bn.running_mean)));
    state.buffers.push_back(snapshot<T>("bn" + idx + ".running_var", shape, std::span<const T>(bn.running_var)));
  }
  return state;
}

template <typename T>
void Model<T>::load_state(const ModelState& state) {
  ModelConfig incoming = state.config;
  std::sort(incoming.eca.begin(), incoming.eca.end());
  if (!(incoming == config_)) {
    throw IncompatibleCheckpoint("checkpoint was saved for " + incoming.label() + " but the model is " +
                                 config_.label());
  }
  if (state.parameters.size() != params_.size() || state.buffers.size() != 2 * blocks_.size()) {
    throw IncompatibleCheckpoint("checkpoint tensor count does not match the model");
  }
  auto copy_into = [](const NamedArray& src, const std::string& name, const ag::Shape& shape, std::span<T> dst) {
    if (src.name != name || src.shape != shape || src.values.size() != dst.size()) {
      throw IncompatibleCheckpoint("checkpoint entry '" + src.name + "' does not match model tensor '" + name + "'");
    }
    std::transform(src.values.begin(), src.values.end(), dst.begin(), [](float v) { return static_cast<T>(v); });
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    copy_into(state.parameters[i], params_[i].name, params_[i].tensor.shape(), params_[i].tensor.values());
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    auto& bn = blocks_[i].bn;
    const ag::Shape shape{bn.running_mean.size()};
    copy_into(state.buffers[2 * i], "bn" + idx + ".running_mean", shape, bn.running_mean);
    copy_into(state.buffers[2 * i + 1], "bn" + idx + ".running_var", shape, bn.running_var);
  }
}

template class Model<float>;
template class Model<double>;

}  // namespace ser::model
