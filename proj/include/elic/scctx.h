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

#ifndef ELIC_SCCTX_H_
#define ELIC_SCCTX_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "elic/entropy_model.h"
#include "elic/layers.h"
#include "elic/ops.h"
#include "elic/tensor.h"

namespace elic {

// Ordered channel chunk sizes C_1..C_K of the latent.
struct GroupingScheme {
  std::vector<size_t> chunk_sizes;

  size_t group_count() const { return chunk_sizes.size(); }
  size_t total() const;
  // First channel of chunk `group` (0-based).
  size_t offset(size_t group) const;
  bool operator==(const GroupingScheme&) const = default;
};

// Uneven grouping [16, 16, 32, 64, m - 128]. Requires m > 128.
GroupingScheme MakeGrouping(size_t m);
// `groups` equal chunks; test configuration for the even channel-conditional
// comparison. Requires m divisible by `groups`.
GroupingScheme MakeEvenGrouping(size_t m, size_t groups);

enum class Phase : uint8_t { kAnchor = 0, kNonAnchor = 1 };

// Anchors sit on the even checkerboard parity.
inline bool IsAnchor(size_t y, size_t x) { return (y + x) % 2 == 0; }

struct PassInfo {
  size_t group = 0;  // 0-based chunk index
  Phase phase = Phase::kAnchor;
  size_t channels = 0;
  size_t locations = 0;
  size_t symbols() const { return channels * locations; }
};

// Two passes per chunk, (1, anchor), (1, non-anchor), (2, anchor), ...
// Within a pass symbols are coded location by location in raster order and,
// at each location, channel by channel.
struct DecodeSchedule {
  size_t height = 0;
  size_t width = 0;
  std::vector<PassInfo> passes;

  // Raster-ordered (y, x) positions of a phase.
  std::vector<std::pair<size_t, size_t>> Locations(Phase phase) const;
  // Number of passes that cover chunks [0, groups).
  static size_t PassCount(size_t groups) { return 2 * groups; }
};

DecodeSchedule MakeSchedule(const GroupingScheme& scheme, size_t height,
                            size_t width);

// Reconstructed chunks y_hat^(1..K). Positions not yet decoded are zero.
struct ContextState {
  std::vector<Tensor> chunks;
};

struct GroupNetworks {
  // g_ch: conv5x5(sum C_<k -> width) -> ReLU -> conv5x5(width -> 2 C_k).
  // Absent for the first chunk.
  bool has_channel_context = false;
  ConvSpec channel_in;
  ConvSpec channel_out;
  // g_sp: single checkerboard-masked conv5x5(C_k -> 2 C_k).
  ConvSpec spatial;
  // Location-wise aggregation, three 1x1 convs with ReLU in between.
  ConvSpec aggregate_in;
  ConvSpec aggregate_mid;
  ConvSpec aggregate_out;
};

inline constexpr size_t kChannelContextWidth = 64;

// 5x5 mask selecting taps of the opposite checkerboard parity to the centre.
std::vector<uint8_t> CheckerboardMask();

// Smooth positive map for the scale head: sigma = clamp(softplus(raw)).
float ScaleFromRaw(float raw);

class ContextModel {
 public:
  ContextModel() = default;
  static ContextModel Make(LayerFactory& f, const GroupingScheme& grouping,
                           size_t m);

  const GroupingScheme& grouping() const { return grouping_; }
  size_t latent_channels() const { return m_; }
  const GroupNetworks& networks(size_t group) const { return groups_[group]; }
  size_t ParameterCount() const;

  // Phi_ch for chunk `group` from chunks [0, group). The first chunk has no
  // channel context and gets an all-zero 2 C_1 x H x W tensor; `height` and
  // `width` size that tensor.
  Tensor ChannelContext(size_t group, std::span<const Tensor> decoded,
                        size_t height, size_t width) const;
  // Phi_sp for chunk `group`. The anchor phase has empty context and yields
  // zeros; the non-anchor phase runs the masked conv over `partial`.
  Tensor SpatialContext(size_t group, Phase phase, const Tensor& partial) const;
  // Concatenates [phi_sp, phi_ch, psi] and maps it to (mu, sigma).
  EntropyParams Aggregate(size_t group, const Tensor& phi_sp,
                          const Tensor& phi_ch, const Tensor& psi) const;

 private:
  GroupingScheme grouping_;
  size_t m_ = 0;
  std::vector<GroupNetworks> groups_;
};

// Per-symbol record of what went into a pass segment.
struct CodedSymbol {
  int32_t q = 0;
  uint32_t frequency = 0;
  bool escaped = false;
};

struct SymbolTrace {
  std::vector<std::vector<CodedSymbol>> passes;
};

// Called after each pass with the pass index and the reconstructed state.
using PassObserver = std::function<void(size_t, const ContextState&)>;

struct LatentEncoding {
  Tensor y_hat;
  EntropyParams params;  // mu and clamped sigma for every latent symbol
  std::vector<std::vector<uint8_t>> segments;  // one per pass
};

struct LatentDecoding {
  Tensor y_hat;  // chunks beyond `groups` are zero
  EntropyParams params;
  size_t groups = 0;
};

// Supplies the bytes of pass segment `index`; called in pass order and only
// for the passes that are decoded.
using SegmentSource = std::function<std::span<const uint8_t>(size_t)>;

LatentEncoding EncodeLatent(const ContextModel& model, const Tensor& y,
                            const Tensor& psi, SymbolTrace* trace = nullptr,
                            const PassObserver& observer = {});

LatentDecoding DecodeLatent(const ContextModel& model, const Tensor& psi,
                            size_t groups, const SegmentSource& segments,
                            const PassObserver& observer = {});

// Means predicted from the hyperprior alone (zero spatial and channel
// context), used for mean filling of undecoded chunks.
Tensor HyperpriorOnlyMeans(const ContextModel& model, size_t group,
                           const Tensor& psi);

}  // namespace elic

#endif  // ELIC_SCCTX_H_
