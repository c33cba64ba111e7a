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

#ifndef ELIC_LAYERS_H_
#define ELIC_LAYERS_H_

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "elic/ops.h"
#include "elic/tensor.h"
#include "elic/weights.h"

namespace elic {

// Builds layer parameters either from a WeightStore or, when constructed
// without one, as zero-filled placeholders while recording every tensor it
// was asked for. Running the same network constructor through both modes
// gives the required-tensor list and the loaded network from one recipe.
class LayerFactory {
 public:
  LayerFactory() = default;
  explicit LayerFactory(const WeightStore& store) : store_(&store) {}

  // Declares `name.weight` (out, in, k, k) and `name.bias` (out).
  ConvSpec Conv(const std::string& name, size_t in, size_t out, size_t kernel,
                size_t stride, size_t padding, float gain = 1.0f);
  std::vector<float> Vector(const std::string& name, size_t n, ParamKind kind);

  const std::vector<TensorDecl>& declared() const { return declared_; }

 private:
  std::vector<float> Fetch(const TensorDecl& decl, size_t count);

  const WeightStore* store_ = nullptr;
  std::vector<TensorDecl> declared_;
};

// x + expand(relu(conv3x3(relu(reduce(x))))) with an N/2-channel bottleneck.
struct ResidualBottleneck {
  ConvSpec reduce;
  ConvSpec conv;
  ConvSpec expand;

  static ResidualBottleneck Make(LayerFactory& f, const std::string& name,
                                 size_t channels);
  size_t ParameterCount() const;
};

Tensor ApplyResidualBottleneck(const Tensor& input,
                               const ResidualBottleneck& block);
// The residual branch alone: ApplyResidualBottleneck(x) == x + this.
Tensor ResidualBranch(const Tensor& input, const ResidualBottleneck& block);

// Simplified attention module: x + trunk(x) * sigmoid(mask(x)), where trunk
// is three residual bottlenecks and mask is three residual bottlenecks
// followed by a 1x1 convolution.
struct AttentionBlock {
  std::array<ResidualBottleneck, 3> trunk;
  std::array<ResidualBottleneck, 3> mask;
  ConvSpec mask_out;

  static AttentionBlock Make(LayerFactory& f, const std::string& name,
                             size_t channels);
  size_t ParameterCount() const;
};

Tensor ApplyAttention(const Tensor& input, const AttentionBlock& block);

struct ConvLayer {
  ConvSpec spec;
};
struct TransposedConvLayer {
  ConvSpec spec;
};
struct ReluLayer {};
struct UpsampleLayer {};

using Layer = std::variant<ConvLayer, TransposedConvLayer, ReluLayer,
                           UpsampleLayer, ResidualBottleneck, AttentionBlock>;

class Sequential {
 public:
  void Append(Layer layer) { layers_.push_back(std::move(layer)); }
  Tensor Forward(Tensor x) const;
  size_t ParameterCount() const;
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

}  // namespace elic

#endif  // ELIC_LAYERS_H_
