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

#include "elic/scctx.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elic/range_coder.h"
#include "elic/status.h"

namespace elic {

size_t GroupingScheme::total() const {
  return std::accumulate(chunk_sizes.begin(), chunk_sizes.end(), size_t{0});
}

size_t GroupingScheme::offset(size_t group) const {
  return std::accumulate(chunk_sizes.begin(), chunk_sizes.begin() + group,
                         size_t{0});
}

GroupingScheme MakeGrouping(size_t m) {
  if (m <= 128) {
    Fail(ErrorCode::kInvalidArgument,
         "uneven grouping needs M > 128, got " + std::to_string(m));
  }
  return GroupingScheme{{16, 16, 32, 64, m - 128}};
}

GroupingScheme MakeEvenGrouping(size_t m, size_t groups) {
  if (groups == 0 || m % groups != 0) {
    Fail(ErrorCode::kInvalidArgument, "even grouping must divide M");
  }
  return GroupingScheme{std::vector<size_t>(groups, m / groups)};
}

std::vector<std::pair<size_t, size_t>> DecodeSchedule::Locations(
    Phase phase) const {
  const bool anchor = phase == Phase::kAnchor;
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      if (IsAnchor(y, x) == anchor) out.emplace_back(y, x);
    }
  }
  return out;
}

DecodeSchedule MakeSchedule(const GroupingScheme& scheme, size_t height,
                            size_t width) {
  DecodeSchedule s;
  s.height = height;
  s.width = width;
  const size_t area = height * width;
  for (size_t k = 0; k < scheme.group_count(); ++k) {
    const size_t c = scheme.chunk_sizes[k];
    s.passes.push_back(PassInfo{k, Phase::kAnchor, c, (area + 1) / 2});
    s.passes.push_back(PassInfo{k, Phase::kNonAnchor, c, area / 2});
  }
  return s;
}

std::vector<uint8_t> CheckerboardMask() {
  std::vector<uint8_t> mask(25);
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) mask[i * 5 + j] = (i + j) % 2 == 1;
  }
  return mask;
}

float ScaleFromRaw(float raw) {
  const float softplus = raw > 20.0f ? raw : std::log1p(std::exp(raw));
  return ClampSigma(softplus);
}

ContextModel ContextModel::Make(LayerFactory& f, const GroupingScheme& grouping,
                                size_t m) {
  if (grouping.total() != m) {
    Fail(ErrorCode::kInvalidArgument, "grouping does not sum to M");
  }
  ContextModel model;
  model.grouping_ = grouping;
  model.m_ = m;
  for (size_t k = 0; k < grouping.group_count(); ++k) {
    const std::string p = "scctx." + std::to_string(k);
    const size_t c = grouping.chunk_sizes[k];
    GroupNetworks g;
    if (k > 0) {
      g.has_channel_context = true;
      g.channel_in = f.Conv(p + ".channel.0", grouping.offset(k),
                            kChannelContextWidth, 5, 1, 2);
      g.channel_out =
          f.Conv(p + ".channel.1", kChannelContextWidth, 2 * c, 5, 1, 2);
    }
    g.spatial = f.Conv(p + ".spatial", c, 2 * c, 5, 1, 2);
    g.spatial.mask = CheckerboardMask();
    const size_t in = 4 * c + 2 * m;
    const size_t mid = (in + 2 * c) / 2;
    const size_t narrow = std::max<size_t>(4 * c, 64);
    g.aggregate_in = f.Conv(p + ".aggregate.0", in, mid, 1, 1, 0);
    g.aggregate_mid = f.Conv(p + ".aggregate.1", mid, narrow, 1, 1, 0);
    g.aggregate_out = f.Conv(p + ".aggregate.2", narrow, 2 * c, 1, 1, 0);
    model.groups_.push_back(std::move(g));
  }
  return model;
}

size_t ContextModel::ParameterCount() const {
  size_t n = 0;
  for (const GroupNetworks& g : groups_) {
    if (g.has_channel_context) {
      n += g.channel_in.ParameterCount() + g.channel_out.ParameterCount();
    }
    n += g.spatial.ParameterCount() + g.aggregate_in.ParameterCount() +
         g.aggregate_mid.ParameterCount() + g.aggregate_out.ParameterCount();
  }
  return n;
}

Tensor ContextModel::ChannelContext(size_t group,
                                    std::span<const Tensor> decoded,
                                    size_t height, size_t width) const {
  const size_t c = grouping_.chunk_sizes.at(group);
  if (group == 0) return Tensor(Shape{2 * c, height, width});
  if (decoded.size() < group) {
    Fail(ErrorCode::kInvalidArgument, "channel context needs earlier chunks");
  }
  Tensor prior(Shape{grouping_.offset(group), height, width});
  for (size_t j = 0; j < group; ++j) {
    WriteChannels(prior, grouping_.offset(j), decoded[j]);
  }
  const GroupNetworks& g = groups_[group];
  Tensor hidden = Relu(Conv2d(prior, g.channel_in));
  return Conv2d(hidden, g.channel_out);
}

Tensor ContextModel::SpatialContext(size_t group, Phase phase,
                                    const Tensor& partial) const {
  const size_t c = grouping_.chunk_sizes.at(group);
  if (partial.channels() != c) {
    Fail(ErrorCode::kInvalidArgument,
         "spatial context expects " + std::to_string(c) + " channels, got " +
             partial.shape().ToString());
  }
  if (phase == Phase::kAnchor) {
    return Tensor(Shape{2 * c, partial.height(), partial.width()});
  }
  return Conv2d(partial, groups_[group].spatial);
}

EntropyParams ContextModel::Aggregate(size_t group, const Tensor& phi_sp,
                                      const Tensor& phi_ch,
                                      const Tensor& psi) const {
  const size_t c = grouping_.chunk_sizes.at(group);
  if (phi_sp.channels() != 2 * c || phi_ch.channels() != 2 * c ||
      psi.channels() != 2 * m_) {
    Fail(ErrorCode::kInvalidArgument, "aggregate: channel mismatch");
  }
  const GroupNetworks& g = groups_[group];
  Tensor t = Concat({&phi_sp, &phi_ch, &psi});
  t = Relu(Conv2d(t, g.aggregate_in));
  t = Relu(Conv2d(t, g.aggregate_mid));
  t = Conv2d(t, g.aggregate_out);
  Tensor mu = SliceChannels(t, 0, c);
  Tensor sigma = SliceChannels(t, c, c);
  for (float& s : sigma.values()) s = ScaleFromRaw(s);
  return MakeEntropyParams(std::move(mu), std::move(sigma));
}

namespace {

using LocationList = std::vector<std::pair<size_t, size_t>>;

// Drives the pass schedule for chunks [0, groups). `code` receives the pass
// index, its locations, the pass parameters and the chunk being rebuilt, and
// must fill the chunk at those locations.
template <typename CodeFn>
ContextState RunPasses(const ContextModel& model, const Tensor& psi,
                       size_t groups, EntropyParams* full, CodeFn&& code,
                       const PassObserver& observer) {
  const GroupingScheme& grouping = model.grouping();
  const size_t m = model.latent_channels();
  if (psi.channels() != 2 * m) {
    Fail(ErrorCode::kInvalidArgument, "hyperprior features must have 2M channels");
  }
  if (groups > grouping.group_count()) {
    Fail(ErrorCode::kInvalidArgument, "too many groups requested");
  }
  const size_t h = psi.height(), w = psi.width();
  const DecodeSchedule schedule = MakeSchedule(grouping, h, w);
  const LocationList anchors = schedule.Locations(Phase::kAnchor);
  const LocationList non_anchors = schedule.Locations(Phase::kNonAnchor);

  ContextState state;
  for (size_t c : grouping.chunk_sizes) state.chunks.emplace_back(Shape{c, h, w});
  full->mu = Tensor(Shape{m, h, w});
  full->sigma = Tensor(Shape{m, h, w}, kSigmaMin);

  for (size_t k = 0; k < groups; ++k) {
    const Tensor phi_ch = model.ChannelContext(
        k, std::span<const Tensor>(state.chunks.data(), k), h, w);
    const size_t base = grouping.offset(k);
    for (Phase phase : {Phase::kAnchor, Phase::kNonAnchor}) {
      const size_t pass = 2 * k + static_cast<size_t>(phase);
      const LocationList& locations =
          phase == Phase::kAnchor ? anchors : non_anchors;
      const Tensor phi_sp = model.SpatialContext(k, phase, state.chunks[k]);
      const EntropyParams params = model.Aggregate(k, phi_sp, phi_ch, psi);
      code(pass, k, locations, params, state.chunks[k]);
      for (const auto& [y, x] : locations) {
        for (size_t c = 0; c < params.mu.channels(); ++c) {
          full->mu.at(base + c, y, x) = params.mu.at(c, y, x);
          full->sigma.at(base + c, y, x) = params.sigma.at(c, y, x);
        }
      }
      if (observer) observer(pass, state);
    }
  }
  return state;
}

Tensor Assemble(const GroupingScheme& grouping, const ContextState& state,
                size_t h, size_t w) {
  Tensor out(Shape{grouping.total(), h, w});
  for (size_t k = 0; k < state.chunks.size(); ++k) {
    WriteChannels(out, grouping.offset(k), state.chunks[k]);
  }
  return out;
}

}  // namespace

LatentEncoding EncodeLatent(const ContextModel& model, const Tensor& y,
                            const Tensor& psi, SymbolTrace* trace,
                            const PassObserver& observer) {
  const GroupingScheme& grouping = model.grouping();
  if (y.channels() != model.latent_channels() || y.height() != psi.height() ||
      y.width() != psi.width()) {
    Fail(ErrorCode::kInvalidArgument,
         "latent " + y.shape().ToString() + " does not match hyperprior " +
             psi.shape().ToString());
  }
  LatentEncoding result;
  result.segments.resize(2 * grouping.group_count());
  if (trace) {
    trace->passes.clear();
    trace->passes.resize(2 * grouping.group_count());
  }
  QuantizedCdf cdf;
  auto code = [&](size_t pass, size_t k, const LocationList& locations,
                  const EntropyParams& params, Tensor& chunk) {
    const size_t base = grouping.offset(k);
    RangeEncoder enc;
    for (const auto& [py, px] : locations) {
      for (size_t c = 0; c < chunk.channels(); ++c) {
        const float mu = params.mu.at(c, py, px);
        const float sigma = params.sigma.at(c, py, px);
        const int32_t q = SaturateSymbol(Quantize(y.at(base + c, py, px), mu));
        BuildCdfInto(sigma, ChooseSupport(sigma), &cdf);
        EncodeSymbol(enc, q, cdf);
        chunk.at(c, py, px) = static_cast<float>(q) + mu;
        if (trace) {
          const size_t bucket = cdf.BucketFor(q);
          trace->passes[pass].push_back(CodedSymbol{
              q, cdf.frequency(bucket), bucket == cdf.escape_index()});
        }
      }
    }
    result.segments[pass] = enc.Finish();
  };
  const ContextState state =
      RunPasses(model, psi, grouping.group_count(), &result.params, code,
                observer);
  result.y_hat = Assemble(grouping, state, y.height(), y.width());
  return result;
}

LatentDecoding DecodeLatent(const ContextModel& model, const Tensor& psi,
                            size_t groups, const SegmentSource& segments,
                            const PassObserver& observer) {
  QuantizedCdf cdf;
  auto code = [&](size_t pass, size_t, const LocationList& locations,
                  const EntropyParams& params, Tensor& chunk) {
    RangeDecoder dec(segments(pass));
    for (const auto& [py, px] : locations) {
      for (size_t c = 0; c < chunk.channels(); ++c) {
        const float mu = params.mu.at(c, py, px);
        const float sigma = params.sigma.at(c, py, px);
        BuildCdfInto(sigma, ChooseSupport(sigma), &cdf);
        const int32_t q = DecodeSymbol(dec, cdf);
        chunk.at(c, py, px) = static_cast<float>(q) + mu;
      }
    }
  };
  LatentDecoding result;
  result.groups = groups;
  const ContextState state =
      RunPasses(model, psi, groups, &result.params, code, observer);
  result.y_hat = Assemble(model.grouping(), state, psi.height(), psi.width());
  return result;
}

Tensor HyperpriorOnlyMeans(const ContextModel& model, size_t group,
                           const Tensor& psi) {
  const size_t c = model.grouping().chunk_sizes.at(group);
  const Tensor zeros(Shape{2 * c, psi.height(), psi.width()});
  return model.Aggregate(group, zeros, zeros, psi).mu;
}

}  // namespace elic
