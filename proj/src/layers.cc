// Copyright (c) the ELIC codec authors
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

#include "elic/layers.h"

#include <utility>

#include "elic/status.h"

namespace elic {

std::vector<float> LayerFactory::Fetch(const TensorDecl& decl, size_t count) {
  declared_.push_back(decl);
  if (store_ == nullptr) return std::vector<float>(count, 0.0f);
  const StoredTensor& t = store_->Get(decl.name);
  if (t.dims != decl.dims) {
    Fail(ErrorCode::kWeightMismatch, "tensor " + decl.name + " has wrong shape");
  }
  return t.data;
}

ConvSpec LayerFactory::Conv(const std::string& name, size_t in, size_t out,
                            size_t kernel, size_t stride, size_t padding,
                            float gain) {
  ConvSpec spec;
  spec.in_channels = in;
  spec.out_channels = out;
  spec.kernel_h = kernel;
  spec.kernel_w = kernel;
  spec.stride = stride;
  spec.padding = padding;
  const size_t fan_in = in * kernel * kernel;
  const auto u32 = [](size_t v) { return static_cast<uint32_t>(v); };
  spec.weights = Fetch(
      TensorDecl{name + ".weight",
                 {u32(out), u32(in), u32(kernel), u32(kernel)},
                 ParamKind::kWeight, fan_in, gain},
      spec.WeightCount());
  spec.bias = Fetch(TensorDecl{name + ".bias", {u32(out)}, ParamKind::kBias,
                               fan_in, 0.1f},
                    out);
  return spec;
}

std::vector<float> LayerFactory::Vector(const std::string& name, size_t n,
                                        ParamKind kind) {
  return Fetch(TensorDecl{name, {static_cast<uint32_t>(n)}, kind, 1, 1.0f}, n);
}

ResidualBottleneck ResidualBottleneck::Make(LayerFactory& f,
                                            const std::string& name,
                                            size_t channels) {
  if (channels % 2 != 0) {
    Fail(ErrorCode::kInvalidArgument,
         "residual bottleneck needs an even channel count, got " +
             std::to_string(channels));
  }
  const size_t half = channels / 2;
  ResidualBottleneck b;
  b.reduce = f.Conv(name + ".reduce", channels, half, 1, 1, 0);
  b.conv = f.Conv(name + ".conv", half, half, 3, 1, 1);
  // Half gain for the expanding conv in random-weight mode.
  b.expand = f.Conv(name + ".expand", half, channels, 1, 1, 0, 0.5f);
  return b;
}

size_t ResidualBottleneck::ParameterCount() const {
  return reduce.ParameterCount() + conv.ParameterCount() +
         expand.ParameterCount();
}

Tensor ResidualBranch(const Tensor& input, const ResidualBottleneck& block) {
  Tensor t = Conv2d(input, block.reduce);
  ReluInPlace(t);
  t = Conv2d(t, block.conv);
  ReluInPlace(t);
  return Conv2d(t, block.expand);
}

Tensor ApplyResidualBottleneck(const Tensor& input,
                               const ResidualBottleneck& block) {
  if (input.channels() != block.reduce.in_channels) {
    Fail(ErrorCode::kInvalidArgument, "residual bottleneck channel mismatch");
  }
  return Add(input, ResidualBranch(input, block));
}

AttentionBlock AttentionBlock::Make(LayerFactory& f, const std::string& name,
                                    size_t channels) {
  AttentionBlock a;
  for (size_t i = 0; i < 3; ++i) {
    a.trunk[i] = ResidualBottleneck::Make(
        f, name + ".trunk." + std::to_string(i), channels);
  }
  for (size_t i = 0; i < 3; ++i) {
    a.mask[i] = ResidualBottleneck::Make(
        f, name + ".mask." + std::to_string(i), channels);
  }
  a.mask_out = f.Conv(name + ".mask_out", channels, channels, 1, 1, 0);
  return a;
}

size_t AttentionBlock::ParameterCount() const {
  size_t n = mask_out.ParameterCount();
  for (const auto& b : trunk) n += b.ParameterCount();
  for (const auto& b : mask) n += b.ParameterCount();
  return n;
}

Tensor ApplyAttention(const Tensor& input, const AttentionBlock& block) {
  if (input.channels() != block.mask_out.in_channels) {
    Fail(ErrorCode::kInvalidArgument, "attention channel mismatch");
  }
  Tensor trunk = input;
  for (const auto& b : block.trunk) trunk = ApplyResidualBottleneck(trunk, b);
  Tensor mask = input;
  for (const auto& b : block.mask) mask = ApplyResidualBottleneck(mask, b);
  mask = Sigmoid(Conv2d(mask, block.mask_out));
  return Add(input, Multiply(trunk, mask));
}

Tensor Sequential::Forward(Tensor x) const {
  for (const Layer& layer : layers_) {
    x = std::visit(
        [&x](const auto& l) -> Tensor {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, ConvLayer>) {
            return Conv2d(x, l.spec);
          } else if constexpr (std::is_same_v<T, TransposedConvLayer>) {
            return TransposedConv2d(x, l.spec);
          } else if constexpr (std::is_same_v<T, ReluLayer>) {
            return Relu(std::move(x));
          } else if constexpr (std::is_same_v<T, UpsampleLayer>) {
            return BilinearUpsample2x(x);
          } else if constexpr (std::is_same_v<T, ResidualBottleneck>) {
            return ApplyResidualBottleneck(x, l);
          } else {
            return ApplyAttention(x, l);
          }
        },
        layer);
  }
  return x;
}

size_t Sequential::ParameterCount() const {
  size_t n = 0;
  for (const Layer& layer : layers_) {
    n += std::visit(
        [](const auto& l) -> size_t {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, ConvLayer> ||
                        std::is_same_v<T, TransposedConvLayer>) {
            return l.spec.ParameterCount();
          } else if constexpr (std::is_same_v<T, ReluLayer> ||
                               std::is_same_v<T, UpsampleLayer>) {
            return 0;
          } else {
            return l.ParameterCount();
          }
        },
        layer);
  }
  return n;
}

}  // namespace elic
