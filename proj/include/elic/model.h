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

#ifndef ELIC_MODEL_H_
#define ELIC_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "elic/entropy_model.h"
#include "elic/layers.h"
#include "elic/scctx.h"
#include "elic/tensor.h"
#include "elic/weights.h"

namespace elic {

enum class Variant : uint8_t { kElic = 0, kElicSmall = 1 };

const char* VariantName(Variant v);
Variant ParseVariant(const std::string& name);

// Number of channels of the latent chunks that feed the thumbnail path.
inline constexpr size_t kThumbnailInputChannels = 128;
inline constexpr size_t kThumbnailGroups = 4;
inline constexpr size_t kDefaultThumbnailWidth = 64;
// Spatial alignment required by the four main and two hyper stride-2 stages.
inline constexpr size_t kPadAlignment = 64;

struct ModelConfig {
  Variant variant = Variant::kElic;
  size_t n = 192;
  size_t m = 320;
  GroupingScheme grouping;
  size_t thumbnail_width = kDefaultThumbnailWidth;

  void Validate() const;
  WeightHeader weight_header() const;
};

// Paper-scale defaults: N = 192, M = 320, uneven grouping.
ModelConfig MakeConfig(Variant variant, size_t n = 192, size_t m = 320);
// Config matching the header of a loaded weight archive.
ModelConfig ConfigForWeights(const WeightHeader& header);

// Rate-distortion trade-off grid, in units of 1e-4.
inline constexpr std::array<int, 8> kLambdaGrid = {4,  8,   16,  32,
                                                   75, 150, 300, 450};
// e.g. "elic_lambda0032.elwt" for lambda = 32e-4.
std::string PresetWeightFileName(Variant variant, int lambda_e4);

// Every tensor the config needs, with shapes and initializer hints.
std::vector<TensorDecl> RequiredTensors(const ModelConfig& config);
WeightStore RandomWeights(const ModelConfig& config, uint64_t seed);

// All networks of the codec, instantiated from a WeightStore.
//
//   g_a: image -> y          (4 stride-2 convs, residual bottlenecks, attention)
//   h_a: y -> z              conv3x3 s1, conv5x5 s2, conv5x5 s2 with ReLU
//   h_s: z_hat -> psi        tconv5x5 s2, tconv5x5 s2, conv3x3 s1 to 2M
//   g_s: y_hat -> image      mirror of g_a
//   thumbnail: first 128 latent channels -> half-resolution image
class Model {
 public:
  Model(const ModelConfig& config, const WeightStore& weights);

  const ModelConfig& config() const { return config_; }
  const Sequential& analysis() const { return analysis_; }
  const Sequential& synthesis() const { return synthesis_; }
  const Sequential& hyper_analysis() const { return hyper_analysis_; }
  const Sequential& hyper_synthesis() const { return hyper_synthesis_; }
  const Sequential& thumbnail() const { return thumbnail_; }
  const ContextModel& context() const { return context_; }
  const FactorizedPrior& hyper_prior() const { return hyper_prior_; }

 private:
  friend std::vector<TensorDecl> RequiredTensors(const ModelConfig& config);
  Model(const ModelConfig& config, LayerFactory& factory);
  void Build(LayerFactory& factory);

  ModelConfig config_;
  Sequential analysis_;
  Sequential synthesis_;
  Sequential hyper_analysis_;
  Sequential hyper_synthesis_;
  Sequential thumbnail_;
  ContextModel context_;
  FactorizedPrior hyper_prior_;
};

}  // namespace elic

#endif  // ELIC_MODEL_H_
