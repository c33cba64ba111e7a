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

// Forward-only inference primitives.
//
// Every reduction is evaluated in a fixed order so that encoder and decoder
// compute bit-identical entropy parameters. For convolutions each output
// element starts from its bias and accumulates in (in_channel, ky, kx) order;
// taps that fall outside the input are skipped. Callers never see a
// data-dependent summation order.

#ifndef ELIC_OPS_H_
#define ELIC_OPS_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "elic/tensor.h"

namespace elic {

// Convolution parameters. Weights are laid out (out, in, kh, kw) for both
// regular and transposed convolutions. The optional mask has kh x kw entries
// and multiplies every filter.
struct ConvSpec {
  size_t in_channels = 0;
  size_t out_channels = 0;
  size_t kernel_h = 1;
  size_t kernel_w = 1;
  size_t stride = 1;
  size_t padding = 0;
  std::vector<float> weights;
  std::vector<float> bias;
  std::vector<uint8_t> mask;  // empty when unmasked

  size_t WeightCount() const {
    return out_channels * in_channels * kernel_h * kernel_w;
  }
  size_t ParameterCount() const { return weights.size() + bias.size(); }
  void Validate() const;

  static ConvSpec Zeros(size_t in, size_t out, size_t kernel, size_t stride,
                        size_t padding);
};

// Output size of a strided convolution along one axis.
size_t ConvOutputSize(size_t in, size_t kernel, size_t stride, size_t padding);
// Transposed convolution; output padding is always stride - 1, so a 5x5
// stride-2 layer with padding 2 exactly doubles the spatial size.
size_t TransposedConvOutputSize(size_t in, size_t kernel, size_t stride,
                                size_t padding);

Tensor Conv2d(const Tensor& input, const ConvSpec& spec);
Tensor TransposedConv2d(const Tensor& input, const ConvSpec& spec);

// Single output element of Conv2d, evaluated in the same order.
float Conv2dAt(const Tensor& input, const ConvSpec& spec, size_t out_channel,
               size_t y, size_t x);

void ReluInPlace(Tensor& t);
Tensor Relu(Tensor t);
Tensor Sigmoid(Tensor t);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Multiply(const Tensor& a, const Tensor& b);
Tensor Scale(Tensor t, float factor);

Tensor Concat(std::initializer_list<const Tensor*> parts);
Tensor SliceChannels(const Tensor& t, size_t begin, size_t count);
void WriteChannels(Tensor& dst, size_t begin, const Tensor& src);

Tensor Crop(const Tensor& t, size_t height, size_t width);
// Extends the bottom and right borders by repeating the last row/column.
Tensor ReplicatePad(const Tensor& t, size_t height, size_t width);

// Half-pixel-centered (align_corners = false) bilinear interpolation; source
// coordinates below zero clamp to the first sample and the last sample
// repeats past the far edge.
Tensor BilinearUpsample2x(const Tensor& input);

// Generalized divisive normalization:
//   y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
// With inverse set the normalizer multiplies instead. gamma is row-major C x C.
Tensor Gdn(const Tensor& input, std::span<const float> beta,
           std::span<const float> gamma, bool inverse);

}  // namespace elic

#endif  // ELIC_OPS_H_
