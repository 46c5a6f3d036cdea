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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "ser/autograd/ops.hpp"
#include "ser/errors.hpp"
#include "ser/training/loss.hpp"
#include "support/test_support.hpp"

namespace ser::ag {
namespace {

using testing::Gen;
using testing::gradcheck;
using testing::project;
using TD = Tensor<double>;

constexpr double kGradTol = 1e-4;
constexpr int kSeeds = 20;

TD t(Shape s, std::vector<double> v, bool rg = false) { return TD::from(std::move(s), std::move(v), rg); }

// Six-nested-loop reference for conv2d.
std::vector<double> conv_oracle(const TD& x, const TD& w, const TD& b, int stride, int pad) {
  const int n = static_cast<int>(x.dim(0)), c = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2)), wd = static_cast<int>(x.dim(3));
  const int o = static_cast<int>(w.dim(0)), k = static_cast<int>(w.dim(2));
  const int ho = (h + 2 * pad - k) / stride + 1, wo = (wd + 2 * pad - k) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(n * o * ho * wo));
  auto xv = x.values();
  auto wv = w.values();
  for (int s = 0; s < n; ++s)
    for (int oc = 0; oc < o; ++oc)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double acc = b.values()[oc];
          for (int ic = 0; ic < c; ++ic)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int r = i * stride + u - pad, q = j * stride + v - pad;
                if (r < 0 || r >= h || q < 0 || q >= wd) continue;
                acc += xv[((s * c + ic) * h + r) * wd + q] * wv[((oc * c + ic) * k + u) * k + v];
              }
          out[((s * o + oc) * ho + i) * wo + j] = acc;
        }
  return out;
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  Gen g(1);
  auto x = g.tensor({2, 1, 5, 6}, false);
  std::vector<double> k(9, 0.0);
  k[4] = 1.0;
  auto y = conv2d(x, t({1, 1, 3, 3}, k), t({1}, {0.0}), 1, 1);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv2d, ConstantFieldGivesNine) {
  auto y = conv2d(TD::full({1, 1, 5, 5}, 1.0), TD::full({1, 1, 3, 3}, 1.0), TD::zeros({1}), 1, 0);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (double v : y.values()) EXPECT_EQ(v, 9.0);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
  Gen g(2);
  auto x = g.tensor({1, 2, 4, 4}, false);
  auto w = g.tensor({3, 2, 3, 3}, false);
  auto b = g.tensor({3}, false);
  auto y = conv2d(x, w, b, 1, 1);
  const auto ref = conv_oracle(x, w, b, 1, 1);
  ASSERT_EQ(y.numel(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.values()[i], ref[i], 1e-14);
}

TEST(Conv2d, RandomConfigurationsMatchOracleAndShapeFormula) {
  Gen g(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = g.integer(1, 2), c = g.integer(1, 3), o = g.integer(1, 3);
    const int k = 2 * g.integer(0, 2) + 1, stride = g.integer(1, 3), pad = g.integer(0, 2);
    const std::size_t h = g.integer(k, 9), w = g.integer(k, 9);
    auto x = g.tensor({n, c, h, w}, false);
    auto wt = g.tensor({o, c, static_cast<std::size_t>(k), static_cast<std::size_t>(k)}, false);
    auto b = g.tensor({o}, false);
    auto y = conv2d(x, wt, b, stride, pad);
    const std::size_t ho = (h + 2 * pad - k) / stride + 1, wo = (w + 2 * pad - k) / stride + 1;
    ASSERT_EQ(y.shape(), (Shape{n, o, ho, wo}));
    const auto ref = conv_oracle(x, wt, b, stride, pad);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(y.values()[i], ref[i], 1e-12);
  }
}

TEST(Conv2d, ShapeErrors) {
  auto x = TD::zeros({1, 2, 4, 4});
  EXPECT_THROW(conv2d(x, TD::zeros({1, 3, 3, 3}), TD::zeros({1}), 1, 1), InvalidShape);
  EXPECT_THROW(conv2d(x, TD::zeros({1, 2, 3, 3}), TD::zeros({2}), 1, 1), InvalidShape);
  EXPECT_THROW(conv2d(x, TD::zeros({1, 2, 7, 7}), TD::zeros({1}), 1, 1), InvalidShape);
  EXPECT_THROW(conv2d(TD::zeros({2, 4, 4}), TD::zeros({1, 2, 3, 3}), TD::zeros({1}), 1, 1), InvalidShape);
}

TEST(Conv2d, LinearInInput) {
  Gen g(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = g.tensor({2, 3, 6, 5}, false);
    auto y = g.tensor({2, 3, 6, 5}, false);
    auto w = g.tensor({4, 3, 3, 3}, false);
    auto zero = TD::zeros({4});
    const double a = g.real(-2, 2), b = g.real(-2, 2);
    std::vector<double> mix(x.numel());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x.values()[i] + b * y.values()[i];
    auto lhs = conv2d(t(x.shape(), mix), w, zero, 1, 1);
    auto cx = conv2d(x, w, zero, 1, 1);
    auto cy = conv2d(y, w, zero, 1, 1);
    for (std::size_t i = 0; i < lhs.numel(); ++i) {
      ASSERT_NEAR(lhs.values()[i], a * cx.values()[i] + b * cy.values()[i], 1e-10);
    }
  }
}

TEST(Conv1d, Examples) {
  auto x = t({1, 1, 4}, {1, 2, 3, 4});
  auto id = conv1d(x, t({1, 1, 3}, {0, 1, 0}));
  EXPECT_EQ(std::vector<double>(id.values().begin(), id.values().end()), (std::vector<double>{1, 2, 3, 4}));
  auto y = conv1d(x, t({1, 1, 3}, {1, 1, 1}));
  EXPECT_EQ(std::vector<double>(y.values().begin(), y.values().end()), (std::vector<double>{3, 6, 9, 7}));
  auto z = conv1d(x, TD::zeros({1, 1, 5}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(conv1d(x, TD::zeros({1, 1, 2})), InvalidConfig);
  EXPECT_THROW(conv1d(TD::zeros({1, 2, 4}), TD::zeros({1, 1, 3})), InvalidShape);
}

// Two-pass statistics reference.
TEST(BatchNorm, MatchesTwoPassOracleAndUpdatesRunningStats) {
  Gen g(5);
  auto x = g.tensor({4, 2, 3, 3}, false);
  auto gamma = g.tensor({2}, false);
  auto beta = g.tensor({2}, false);
  BatchNormState<double> state(2);
  auto y = batchnorm2d(x, gamma, beta, state, Mode::train);
  const std::size_t hw = 9, m = 36;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double mu = 0.0;
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t i = 0; i < hw; ++i) mu += x.values()[(s * 2 + ch) * hw + i];
    mu /= m;
    double var = 0.0;
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t i = 0; i < hw; ++i) var += std::pow(x.values()[(s * 2 + ch) * hw + i] - mu, 2);
    var /= m;
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < hw; ++i) {
        const std::size_t idx = (s * 2 + ch) * hw + i;
        const double ref = gamma.values()[ch] * (x.values()[idx] - mu) / std::sqrt(var + 1e-5) + beta.values()[ch];
        ASSERT_NEAR(y.values()[idx], ref, 1e-10);
      }
    }
    EXPECT_NEAR(state.running_mean[ch], 0.1 * mu, 1e-12);
    EXPECT_NEAR(state.running_var[ch], 0.9 + 0.1 * var * m / (m - 1), 1e-12);
  }
}

TEST(BatchNorm, TrainModeStandardizesAndConstantGivesBeta) {
  Gen g(6);
  std::vector<double> raw(96);
  for (double& v : raw) v = 2.0 * g.normal();
  auto x = t({3, 2, 4, 4}, raw);
  BatchNormState<double> state(2);
  auto y = batchnorm2d(x, TD::full({2}, 1.0), TD::zeros({2}), state, Mode::train);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double mu = 0.0, sq = 0.0;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < 16; ++i) {
        const double v = y.values()[(s * 2 + ch) * 16 + i];
        mu += v;
        sq += v * v;
      }
    mu /= 48;
    EXPECT_NEAR(mu, 0.0, 1e-5);
    EXPECT_NEAR(sq / 48 - mu * mu, 1.0, 1e-5);
  }
  BatchNormState<double> single(1);
  auto flat = batchnorm2d(TD::full({2, 1, 2, 2}, 3.5), TD::full({1}, 2.0), TD::full({1}, 0.25), single, Mode::train);
  for (double v : flat.values()) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(BatchNorm, EvalModeUsesRunningStats) {
  BatchNormState<double> state(1);
  state.running_mean = {2.0};
  state.running_var = {4.0};
  auto y = batchnorm2d(t({1, 1, 1, 2}, {2.0, 4.0}), TD::full({1}, 1.0), TD::zeros({1}), state, Mode::eval);
  EXPECT_NEAR(y.values()[0], 0.0, 1e-15);
  EXPECT_NEAR(y.values()[1], 2.0 / std::sqrt(4.0 + 1e-5), 1e-12);
  EXPECT_EQ(state.running_mean[0], 2.0);
  EXPECT_THROW(batchnorm2d(TD::zeros({1, 1, 1, 1}), TD::full({1}, 1.0), TD::zeros({1}), state, Mode::train),
               InvalidShape);
}

TEST(Activation, Examples) {
  auto r = relu(t({3}, {-1, 0, 2}));
  EXPECT_EQ(std::vector<double>(r.values().begin(), r.values().end()), (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(sigmoid(t({1}, {0.0})).item(), 0.5);
  auto uniform = softmax_lastdim(TD::zeros({4}));
  for (double v : uniform.values()) EXPECT_EQ(v, 0.25);
  auto big = softmax_lastdim(t({2, 2}, {1000.0, 1000.0, -1000.0, 0.0}));
  EXPECT_EQ(big.values()[0], 0.5);
  EXPECT_NEAR(big.values()[3], 1.0, 1e-15);
  EXPECT_EQ(activation(t({1}, {-3.0}), Activation::relu).item(), 0.0);
}

TEST(Pooling, AvgPoolExamplesAndOracle) {
  EXPECT_EQ(avgpool2d(t({1, 1, 2, 2}, {1, 2, 3, 4})).item(), 2.5);
  auto flat = avgpool2d(TD::full({1, 2, 4, 6}, 1.75));
  for (double v : flat.values()) EXPECT_EQ(v, 1.75);
  Gen g(7);
  auto x = g.tensor({1, 1, 5, 5}, false);
  auto y = avgpool2d(x);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) acc += x.values()[(2 * i + u) * 5 + 2 * j + v];
      EXPECT_NEAR(y.values()[i * 2 + j], acc / 4, 1e-15);
    }
  // Changing the dropped row and column leaves the output untouched.
  auto x2 = TD::from(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
  for (int i = 0; i < 5; ++i) {
    x2.values()[4 * 5 + i] = 99.0;
    x2.values()[i * 5 + 4] = -99.0;
  }
  auto y2 = avgpool2d(x2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y.values()[i], y2.values()[i]);
  EXPECT_THROW(avgpool2d(TD::zeros({1, 1, 1, 4})), InvalidShape);
}

TEST(Pooling, PoolChainFloorsOddSizes) {
  std::size_t h = 601;
  const std::size_t expected[] = {300, 150, 75, 37, 18};
  for (std::size_t e : expected) {
    h = avgpool2d(TD::zeros({1, 1, h, 2})).dim(2);
    EXPECT_EQ(h, e);
  }
}

TEST(Pooling, GlobalAveragePool) {
  auto y = global_avgpool(t({1, 2, 2, 2}, {1, 3, 5, 7, 2, 2, 2, 2}));
  ASSERT_EQ(y.shape(), (Shape{1, 2}));
  EXPECT_EQ(y.values()[0], 4.0);
  EXPECT_EQ(y.values()[1], 2.0);
  Gen g(8);
  auto x = g.tensor({3, 4, 5, 7}, false);
  auto z = global_avgpool(x);
  for (std::size_t p = 0; p < 12; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 35; ++i) acc += x.values()[p * 35 + i];
    EXPECT_NEAR(z.values()[p], acc / 35, 1e-12);
  }
}

TEST(Linear, ExamplesAndOracle) {
  Gen g(9);
  auto x = g.tensor({2, 3}, false);
  auto eye = t({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto id = linear(x, eye, TD::zeros({3}));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(id.values()[i], x.values()[i]);
  EXPECT_EQ(linear(TD::full({1, 7}, 1.0), TD::full({1, 7}, 1.0), TD::zeros({1})).item(), 7.0);
  auto w = g.tensor({4, 3}, false);
  auto b = g.tensor({4}, false);
  auto y = linear(x, w, b);
  ASSERT_EQ(y.shape(), (Shape{2, 4}));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t o = 0; o < 4; ++o) {
      double acc = b.values()[o];
      for (std::size_t d = 0; d < 3; ++d) acc += x.values()[r * 3 + d] * w.values()[o * 3 + d];
      EXPECT_NEAR(y.values()[r * 4 + o], acc, 1e-15);
    }
  EXPECT_THROW(linear(x, TD::zeros({4, 2}), b), InvalidShape);
  EXPECT_THROW(linear(x, w, TD::zeros({3})), InvalidShape);
}

TEST(Backward, SumOfSquaresGivesTwoX) {
  Gen g(10);
  auto x = g.tensor({5});
  sum(mul(x, x)).backward();
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(x.grad()[i], 2 * x.values()[i]);
}

TEST(Backward, SharedInputAccumulatesBothPaths) {
  Gen g(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = g.tensor({2, 3});
    auto w1 = g.tensor({4, 3}, false), w2 = g.tensor({4, 3}, false);
    auto b = TD::zeros({4});
    auto y = add(relu(linear(x, w1, b)), sigmoid(linear(x, w2, b)));
    project(y, 7).backward();
    // Duplicated-input oracle: two independent copies, gradients summed.
    auto xa = TD::from(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
    auto xb = TD::from(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
    project(add(relu(linear(xa, w1, b)), sigmoid(linear(xb, w2, b))), 7).backward();
    for (std::size_t i = 0; i < x.numel(); ++i) ASSERT_NEAR(x.grad()[i], xa.grad()[i] + xb.grad()[i], 1e-15);
  }
}

TEST(Backward, RepeatedBackwardAccumulatesIntoLeaves) {
  auto x = t({2}, {1.5, -2.0}, true);
  sum(scale(x, 3.0)).backward();
  sum(scale(x, 3.0)).backward();
  EXPECT_EQ(x.grad()[0], 6.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()[1], 0.0);
}

TEST(Backward, NonParticipatingTensorGetsZeroGrad) {
  auto x = t({3}, {-1.0, -2.0, -0.5}, true);
  auto y = t({3}, {1.0, 1.0, 1.0}, true);
  sum(add(relu(x), y)).backward();
  ASSERT_TRUE(x.has_grad());
  for (double v : x.grad()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, RequiresScalarAndGrad) {
  EXPECT_THROW(TD::zeros({2}, true).backward(), InvalidShape);
  EXPECT_THROW(sum(TD::zeros({2}, false)).backward(), InvalidInput);
}

TEST(Backward, CycleIsReportedAsInternalError) {
  auto x = t({1}, {1.0}, true);
  auto y = scale(x, 2.0);
  // Splice the output into its own producer to form a loop.
  auto* node = const_cast<Node<double>*>(y.producer());
  node->inputs.push_back(y);
  EXPECT_THROW(y.backward(), InternalError);
  node->inputs.pop_back();
}

TEST(Backward, NoGradGuardRecordsNothing) {
  auto x = t({2}, {1.0, 2.0}, true);
  NoGradGuard guard;
  auto y = mul(x, x);
  EXPECT_TRUE(y.is_leaf());
  EXPECT_FALSE(y.requires_grad());
}

TEST(ShapeAlgebra, ReshapeAndErrors) {
  Gen g(12);
  auto x = g.tensor({2, 3, 4});
  auto r = reshape(x, {6, 4});
  EXPECT_EQ(r.shape(), (Shape{6, 4}));
  project(r, 3).backward();
  EXPECT_TRUE(x.has_grad());
  EXPECT_THROW(reshape(x, {5, 5}), InvalidShape);
  EXPECT_THROW(add(x, TD::zeros({2, 3})), InvalidShape);
  EXPECT_THROW(TD::from({2, 2}, {1.0}), InvalidShape);
  EXPECT_THROW(TD::zeros({0, 2}), InvalidShape);
  EXPECT_THROW(scale_channels(x, TD::zeros({2, 3})), InvalidShape);
}

using TF = Tensor<float>;

struct OpTrace {
  std::vector<float> out, gx, gw, gb;
  bool operator==(const OpTrace&) const = default;
};

// Runs conv2d and linear forward and backward on fresh copies of the inputs.
OpTrace trace_ops(const std::vector<float>& x, const std::vector<float>& w, std::size_t n,
                  std::vector<std::unique_ptr<float[]>>& ballast, Gen& noise) {
  ballast.emplace_back(new float[static_cast<std::size_t>(noise.integer(1, 37))]);
  auto xt = TF::from({n, 3, 17, 23}, x, true);
  auto wt = TF::from({8, 3, 3, 3}, std::vector<float>(w.begin(), w.begin() + 216), true);
  auto bt = TF::from({8}, std::vector<float>(w.begin() + 216, w.begin() + 224), true);
  auto y = relu(conv2d(xt, wt, bt, 1, 1));
  auto fw = TF::from({4, 8}, std::vector<float>(w.begin(), w.begin() + 32), true);
  auto z = linear(reshape(global_avgpool(y), {n, 8}), fw, TF::zeros({4}, true));
  auto proj = TF::from(z.shape(), std::vector<float>(w.begin() + 100, w.begin() + 100 + static_cast<long>(z.numel())));
  sum(mul(z, proj)).backward();
  OpTrace tr;
  tr.out.assign(z.values().begin(), z.values().end());
  tr.gx.assign(xt.grad().begin(), xt.grad().end());
  tr.gw.assign(wt.grad().begin(), wt.grad().end());
  tr.gb.assign(bt.grad().begin(), bt.grad().end());
  return tr;
}

TEST(Determinism, ResultsIgnoreBufferPlacement) {
  Gen g(13);
  Gen noise(14);
  std::vector<std::unique_ptr<float[]>> ballast;
  auto floats = [&](std::size_t count) {
    std::vector<float> v(count);
    for (float& f : v) f = static_cast<float>(g.real(-1, 1));
    return v;
  };
  for (std::size_t n : {1, 2, 5}) {
    const auto x = floats(n * 3 * 17 * 23);
    const auto w = floats(224);
    const OpTrace first = trace_ops(x, w, n, ballast, noise);
    for (int trial = 0; trial < 40; ++trial) ASSERT_EQ(trace_ops(x, w, n, ballast, noise), first) << "n=" << n;
  }
}

// Finite-difference checks, one random shape per seed.

TEST(GradCheck, Conv2d) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(100 + seed);
    const std::size_t c = g.integer(1, 3), o = g.integer(1, 3), k = 2 * g.integer(0, 1) + 1;
    const int stride = g.integer(1, 2), pad = g.integer(0, 1);
    const std::size_t h = g.integer(3, 6), w = g.integer(3, 6);
    auto res = gradcheck([&](auto& in) { return project(conv2d(in[0], in[1], in[2], stride, pad), seed); },
                         {g.tensor({2, c, h, w}), g.tensor({o, c, k, k}), g.tensor({o})});
    EXPECT_LT(res.max_rel_error, kGradTol) << "seed " << seed;
  }
}

TEST(GradCheck, Conv1d) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(200 + seed);
    const std::size_t k = 2 * g.integer(0, 3) + 1, c = g.integer(2, 12);
    auto res = gradcheck([&](auto& in) { return project(conv1d(in[0], in[1]), seed); },
                         {g.tensor({static_cast<std::size_t>(g.integer(1, 3)), 1, c}), g.tensor({1, 1, k})});
    EXPECT_LT(res.max_rel_error, kGradTol) << "seed " << seed;
  }
}

TEST(GradCheck, BatchNormTrainAndEval) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(300 + seed);
    const std::size_t n = g.integer(1, 3), c = g.integer(1, 3), h = g.integer(2, 4), w = g.integer(1, 4);
    for (Mode mode : {Mode::train, Mode::eval}) {
      BatchNormState<double> state(c);
      for (std::size_t ch = 0; ch < c; ++ch) state.running_var[ch] = g.real(0.5, 2.0);
      auto res = gradcheck(
          [&](auto& in) { return project(batchnorm2d(in[0], in[1], in[2], state, mode), seed); },
          {g.tensor({n, c, h, w}), g.tensor({c}), g.tensor({c})});
      EXPECT_LT(res.max_rel_error, kGradTol) << "seed " << seed;
    }
  }
}

TEST(GradCheck, Activations) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(400 + seed);
    const Shape s{static_cast<std::size_t>(g.integer(1, 3)), static_cast<std::size_t>(g.integer(2, 6))};
    auto x = TD::from(s, g.away_from_zero(numel(s)), true);
    EXPECT_LT(gradcheck([&](auto& in) { return project(relu(in[0]), seed); }, {x}).max_rel_error, kGradTol);
    EXPECT_LT(gradcheck([&](auto& in) { return project(sigmoid(in[0]), seed); }, {g.tensor(s)}).max_rel_error,
              kGradTol);
    EXPECT_LT(gradcheck([&](auto& in) { return project(softmax_lastdim(in[0]), seed); }, {g.tensor(s)}).max_rel_error,
              kGradTol);
  }
}

TEST(GradCheck, PoolingLinearAndElementwise) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(500 + seed);
    const std::size_t n = g.integer(1, 2), c = g.integer(1, 3), h = g.integer(2, 7), w = g.integer(2, 7);
    EXPECT_LT(gradcheck([&](auto& in) { return project(avgpool2d(in[0]), seed); }, {g.tensor({n, c, h, w})}).max_rel_error,
              kGradTol);
    EXPECT_LT(
        gradcheck([&](auto& in) { return project(global_avgpool(in[0]), seed); }, {g.tensor({n, c, h, w})}).max_rel_error,
        kGradTol);
    EXPECT_LT(gradcheck([&](auto& in) { return project(scale_channels(in[0], in[1]), seed); },
                        {g.tensor({n, c, h, w}), g.tensor({n, c})})
                  .max_rel_error,
              kGradTol);
    const std::size_t d = g.integer(1, 5), o = g.integer(1, 4);
    EXPECT_LT(gradcheck([&](auto& in) { return project(linear(in[0], in[1], in[2]), seed); },
                        {g.tensor({n, d}), g.tensor({o, d}), g.tensor({o})})
                  .max_rel_error,
              kGradTol);
    EXPECT_LT(gradcheck([&](auto& in) { return mean(mul(add(in[0], in[1]), scale(in[1], 1.5))); },
                        {g.tensor({n, d}), g.tensor({n, d})})
                  .max_rel_error,
              kGradTol);
  }
}

TEST(GradCheck, ComposedGraphEndToEnd) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Gen g(600 + seed);
    const std::vector<int> targets{0, 2, 1};
    const std::vector<double> weights{1.2, 0.7, 1.1};
    BatchNormState<double> state(2);
    auto res = gradcheck(
        [&](auto& in) {
          auto h = conv2d(in[0], in[1], in[2], 1, 1);
          h = relu(batchnorm2d(h, in[3], in[4], state, Mode::train));
          h = reshape(avgpool2d(h), {3, 2 * 2 * 2});
          auto probs = softmax_lastdim(linear(h, in[5], in[6]));
          return train::weighted_focal_loss(probs, targets, weights, 1.0);
        },
        {g.tensor({3, 1, 4, 4}), g.tensor({2, 1, 3, 3}), g.tensor({2}), g.tensor({2}), g.tensor({2}), g.tensor({3, 8}),
         g.tensor({3})});
    EXPECT_LT(res.max_rel_error, kGradTol) << "seed " << seed;
  }
}

}  // namespace
}  // namespace ser::ag
