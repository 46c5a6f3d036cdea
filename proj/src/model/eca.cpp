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

#include "ser/errors.hpp"
#include "ser/model.hpp"

namespace ser::model {

template <typename T>
EcaResult<T> eca_forward(const ag::Tensor<T>& x, const ag::Tensor<T>& kernel) {
  if (x.rank() != 4) throw InvalidShape("attention block expects [N,C,H,W], got " + ag::to_string(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1);
  // No normalization between the channel convolution and the gate.
  const ag::Tensor<T> query = ag::global_avgpool(x);
  const ag::Tensor<T> mixed = ag::conv1d(ag::reshape(query, {n, 1, c}), kernel);
  ag::Tensor<T> scores = ag::sigmoid(ag::reshape(mixed, {n, c}));
  return {ag::scale_channels(x, scores), scores};
}

template EcaResult<float> eca_forward<float>(const ag::Tensor<float>&, const ag::Tensor<float>&);
template EcaResult<double> eca_forward<double>(const ag::Tensor<double>&, const ag::Tensor<double>&);

}  // namespace ser::model
