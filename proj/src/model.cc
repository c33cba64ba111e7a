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

#include "elic/model.h"

#include <cstdio>
#include <utility>

#include "elic/status.h"

namespace elic {

const char* VariantName(Variant v) {
  return v == Variant::kElic ? "elic" : "elic-sm";
}

Variant ParseVariant(const std::string& name) {
  if (name == "elic") return Variant::kElic;
  if (name == "elic-sm") return Variant::kElicSmall;
  Fail(ErrorCode::kInvalidArgument, "unknown variant '" + name + "'");
}

void ModelConfig::Validate() const {
  if (n < 2 || n % 2 != 0) {
    Fail(ErrorCode::kInvalidArgument, "N must be even and positive");
  }
  if (variant == Variant::kElic && m % 2 != 0) {
    Fail(ErrorCode::kInvalidArgument, "ELIC attention on the latent needs even M");
  }
  if (grouping.total() != m) {
    Fail(ErrorCode::kInvalidArgument, "grouping must sum to M");
  }
  if (grouping.group_count() <= kThumbnailGroups) {
    Fail(ErrorCode::kInvalidArgument,
         "thumbnail decoding needs more than four chunks");
  }
  if (thumbnail_width == 0) {
    Fail(ErrorCode::kInvalidArgument, "thumbnail width must be positive");
  }
}

WeightHeader ModelConfig::weight_header() const {
  WeightHeader h;
  h.variant = static_cast<uint8_t>(variant);
  h.n = static_cast<uint32_t>(n);
  h.m = static_cast<uint32_t>(m);
  return h;
}

ModelConfig MakeConfig(Variant variant, size_t n, size_t m) {
  ModelConfig c;
  c.variant = variant;
  c.n = n;
  c.m = m;
  c.grouping = MakeGrouping(m);
  c.Validate();
  return c;
}

ModelConfig ConfigForWeights(const WeightHeader& header) {
  if (header.variant > static_cast<uint8_t>(Variant::kElicSmall)) {
    Fail(ErrorCode::kWeightMismatch, "unknown variant id in weight file");
  }
  return MakeConfig(static_cast<Variant>(header.variant), header.n, header.m);
}

std::string PresetWeightFileName(Variant variant, int lambda_e4) {
  bool known = false;
  for (int l : kLambdaGrid) known |= l == lambda_e4;
  if (!known) {
    Fail(ErrorCode::kInvalidArgument,
         "lambda " + std::to_string(lambda_e4) + "e-4 is not a preset");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_lambda%04d.elwt", VariantName(variant),
                lambda_e4);
  return buf;
}

Model::Model(const ModelConfig& config, const WeightStore& weights)
    : config_(config) {
  config_.Validate();
  const WeightHeader& h = weights.header();
  if (h.variant != static_cast<uint8_t>(config.variant) || h.n != config.n ||
      h.m != config.m) {
    Fail(ErrorCode::kWeightMismatch,
         "weight header does not match the model configuration");
  }
  LayerFactory factory(weights);
  Build(factory);
}

Model::Model(const ModelConfig& config, LayerFactory& factory)
    : config_(config) {
  config_.Validate();
  Build(factory);
}

void Model::Build(LayerFactory& f) {
  const size_t n = config_.n, m = config_.m;
  const bool full = config_.variant == Variant::kElic;
  const size_t blocks = full ? 3 : 1;

  {
    size_t i = 0;
    auto name = [&i]() { return "g_a." + std::to_string(i++); };
    auto stage = [&](size_t in, size_t out) {
      analysis_.Append(ConvLayer{f.Conv(name(), in, out, 5, 2, 2)});
    };
    auto res = [&](size_t ch) {
      for (size_t b = 0; b < blocks; ++b) {
        analysis_.Append(ResidualBottleneck::Make(f, name(), ch));
      }
    };
    stage(3, n);
    res(n);
    stage(n, n);
    res(n);
    if (full) analysis_.Append(AttentionBlock::Make(f, name(), n));
    stage(n, n);
    res(n);
    stage(n, m);
    if (full) analysis_.Append(AttentionBlock::Make(f, name(), m));
  }
  {
    size_t i = 0;
    auto name = [&i]() { return "g_s." + std::to_string(i++); };
    auto stage = [&](size_t in, size_t out) {
      synthesis_.Append(TransposedConvLayer{f.Conv(name(), in, out, 5, 2, 2)});
    };
    auto res = [&](size_t ch) {
      for (size_t b = 0; b < blocks; ++b) {
        synthesis_.Append(ResidualBottleneck::Make(f, name(), ch));
      }
    };
    if (full) synthesis_.Append(AttentionBlock::Make(f, name(), m));
    stage(m, n);
    res(n);
    stage(n, n);
    if (full) synthesis_.Append(AttentionBlock::Make(f, name(), n));
    res(n);
    stage(n, n);
    res(n);
    stage(n, 3);
  }

  hyper_analysis_.Append(ConvLayer{f.Conv("h_a.0", m, n, 3, 1, 1)});
  hyper_analysis_.Append(ReluLayer{});
  hyper_analysis_.Append(ConvLayer{f.Conv("h_a.1", n, n, 5, 2, 2)});
  hyper_analysis_.Append(ReluLayer{});
  hyper_analysis_.Append(ConvLayer{f.Conv("h_a.2", n, n, 5, 2, 2)});

  hyper_synthesis_.Append(TransposedConvLayer{f.Conv("h_s.0", n, n, 5, 2, 2)});
  hyper_synthesis_.Append(ReluLayer{});
  hyper_synthesis_.Append(TransposedConvLayer{f.Conv("h_s.1", n, n, 5, 2, 2)});
  hyper_synthesis_.Append(ReluLayer{});
  hyper_synthesis_.Append(ConvLayer{f.Conv("h_s.2", n, 2 * m, 3, 1, 1)});

  hyper_prior_.mu = f.Vector("hyper_prior.mu", n, ParamKind::kPriorMean);
  hyper_prior_.sigma = f.Vector("hyper_prior.sigma", n, ParamKind::kPriorScale);
  for (float& s : hyper_prior_.sigma) s = ClampSigma(s);

  context_ = ContextModel::Make(f, config_.grouping, m);

  const size_t tw = config_.thumbnail_width;
  const size_t thumb_in = config_.grouping.offset(kThumbnailGroups);
  thumbnail_.Append(ConvLayer{f.Conv("thumb.0", thumb_in, tw, 3, 1, 1)});
  thumbnail_.Append(ReluLayer{});
  for (size_t i = 1; i <= 3; ++i) {
    thumbnail_.Append(UpsampleLayer{});
    thumbnail_.Append(
        ConvLayer{f.Conv("thumb." + std::to_string(i), tw, tw, 3, 1, 1)});
    thumbnail_.Append(ReluLayer{});
  }
  thumbnail_.Append(ConvLayer{f.Conv("thumb.4", tw, 3, 3, 1, 1)});
}

std::vector<TensorDecl> RequiredTensors(const ModelConfig& config) {
  LayerFactory factory;
  Model model(config, factory);
  return factory.declared();
}

WeightStore RandomWeights(const ModelConfig& config, uint64_t seed) {
  const std::vector<TensorDecl> decls = RequiredTensors(config);
  return RandomWeightStore(config.weight_header(), decls, seed);
}

}  // namespace elic
