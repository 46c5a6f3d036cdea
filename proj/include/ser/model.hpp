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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ser/autograd/ops.hpp"
#include "ser/autograd/tensor.hpp"

namespace ser::model {

inline constexpr int kNumBlocks = 6;
inline constexpr std::array<int, kNumBlocks> kBaseChannels{16, 32, 48, 64, 80, 96};

struct EcaPlacement {
  int layer = 0;   // 1..6
  int kernel = 0;  // odd
  friend auto operator<=>(const EcaPlacement&, const EcaPlacement&) = default;
};

enum class EcaPreset { none, proposed, original };

// Kernel size of the adaptive channel rule: t = |log2(C)/2 + 1/2|, truncated
// and bumped to the next odd value when even, never below 3.
int original_eca_kernel(int channels);

// `proposed`: layers 5 and 6 with k = 7. `original`: every layer, kernel from
// original_eca_kernel of that layer's channel count.
std::vector<EcaPlacement> eca_preset(EcaPreset preset, int scale_n);

struct ModelConfig {
  int scale_n = 1;
  std::vector<EcaPlacement> eca;  // kept sorted by layer
  int num_classes = 4;
  int input_time = 601;
  int input_mel = 64;

  int channels(int layer) const { return kBaseChannels.at(static_cast<std::size_t>(layer - 1)) * scale_n; }
  const EcaPlacement* eca_at(int layer) const;

  // Throws InvalidConfig.
  void validate() const;

  // e.g. "n4" or "n4+eca[5:7,6:7]"
  std::string label() const;

  static ModelConfig with_preset(int scale_n, EcaPreset preset);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Precision-neutral snapshot of a model: what a checkpoint stores.
struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

struct ModelState {
  ModelConfig config;
  std::vector<NamedArray> parameters;
  std::vector<NamedArray> buffers;  // batch-norm running statistics
};

template <typename T>
struct Parameter {
  std::string name;
  ag::Tensor<T> tensor;
};

// Output and channel scores of one attention block.
template <typename T>
struct EcaResult {
  ag::Tensor<T> output;  // [N,C,H,W]
  ag::Tensor<T> scores;  // [N,C], each in (0,1)
};

// Global average pool -> k-tap conv across channels -> sigmoid -> rescale.
// `kernel` has shape [1,1,k].
template <typename T>
EcaResult<T> eca_forward(const ag::Tensor<T>& x, const ag::Tensor<T>& kernel);

template <typename T>
class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // [N,1,time,mel] -> [N,num_classes] logits. In train mode batch-norm
  // running statistics are updated.
  ag::Tensor<T> forward(const ag::Tensor<T>& batch, ag::Mode mode);

  // Eval-mode channel scores of the attention block at `layer`, without
  // recording gradients. Throws InvalidConfig if no block sits there.
  ag::Tensor<T> extract_eca_scores(const ag::Tensor<T>& batch, int layer);

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();

  ModelState export_state() const;
  // Throws IncompatibleCheckpoint on any config, name or shape mismatch.
  void load_state(const ModelState& state);

 private:
  struct Block {
    ag::Tensor<T> weight, bias, gamma, beta;
    ag::BatchNormState<T> bn;
    ag::Tensor<T> eca;  // undefined when the layer has no attention block
  };

  ag::Tensor<T> run(const ag::Tensor<T>& batch, ag::Mode mode, std::map<int, ag::Tensor<T>>* scores);

  ModelConfig config_;
  std::vector<Block> blocks_;
  ag::Tensor<T> fc1_weight_, fc1_bias_, fc2_weight_, fc2_bias_;
  std::vector<Parameter<T>> params_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace ser::model
