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

#include "elic/codec.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "elic/ops.h"
#include "elic/range_coder.h"
#include "elic/status.h"

namespace elic {
namespace {

constexpr size_t kLatentStride = 16;
constexpr size_t kHyperStride = 64;

std::vector<uint8_t> EncodeHyperLatent(const Tensor& z, const FactorizedPrior& prior,
                                       Tensor* z_hat,
                                       std::vector<CodedSymbol>* trace) {
  *z_hat = Tensor(z.shape());
  RangeEncoder enc;
  for (size_t c = 0; c < z.channels(); ++c) {
    const float mu = prior.mu[c];
    const float sigma = prior.sigma[c];
    const QuantizedCdf cdf = BuildCdf(sigma, ChooseSupport(sigma));
    for (size_t i = 0; i < z.shape().plane(); ++i) {
      const int32_t q = SaturateSymbol(Quantize(z.plane(c)[i], mu));
      EncodeSymbol(enc, q, cdf);
      z_hat->plane(c)[i] = static_cast<float>(q) + mu;
      if (trace) {
        const size_t bucket = cdf.BucketFor(q);
        trace->push_back(CodedSymbol{q, cdf.frequency(bucket),
                                     bucket == cdf.escape_index()});
      }
    }
  }
  return enc.Finish();
}

Tensor DecodeHyperLatent(std::span<const uint8_t> segment,
                         const FactorizedPrior& prior, Shape shape) {
  Tensor z_hat(shape);
  RangeDecoder dec(segment);
  for (size_t c = 0; c < shape.channels; ++c) {
    const float mu = prior.mu[c];
    const float sigma = prior.sigma[c];
    const QuantizedCdf cdf = BuildCdf(sigma, ChooseSupport(sigma));
    for (size_t i = 0; i < shape.plane(); ++i) {
      z_hat.plane(c)[i] = static_cast<float>(DecodeSymbol(dec, cdf)) + mu;
    }
  }
  return z_hat;
}

Tensor ClampUnit(Tensor t) {
  for (float& v : t.values()) v = std::clamp(v, 0.0f, 1.0f);
  return t;
}

}  // namespace

size_t PaddedSize(size_t n) {
  return (n + kPadAlignment - 1) / kPadAlignment * kPadAlignment;
}

Codec::Codec(const ModelConfig& config, const WeightStore& weights)
    : model_(config, weights) {}

EncodeOutput Codec::Encode(const Tensor& image, CodingTrace* trace) const {
  if (image.channels() != 3 || image.height() == 0 || image.width() == 0) {
    Fail(ErrorCode::kInvalidArgument,
         "encode expects a 3 x H x W image, got " + image.shape().ToString());
  }
  for (float v : image.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      Fail(ErrorCode::kInvalidArgument, "pixel values must lie in [0, 1]");
    }
  }
  const Tensor padded = ReplicatePad(image, PaddedSize(image.height()),
                                     PaddedSize(image.width()));
  EncodeOutput out;
  out.y = model_.analysis().Forward(padded);
  const Tensor z = model_.hyper_analysis().Forward(out.y);

  const FactorizedPrior& prior = model_.hyper_prior();
  std::vector<uint8_t> z_segment =
      EncodeHyperLatent(z, prior, &out.z_hat, trace ? &trace->z : nullptr);
  out.z_params = prior.Broadcast(z.height(), z.width());
  const Tensor psi = model_.hyper_synthesis().Forward(out.z_hat);

  LatentEncoding latent = EncodeLatent(model_.context(), out.y, psi,
                                       trace ? &trace->latent : nullptr);
  out.y_hat = std::move(latent.y_hat);
  out.params = std::move(latent.params);

  out.bitstream.header.version = kBitstreamVersion;
  out.bitstream.header.variant = static_cast<uint8_t>(config().variant);
  out.bitstream.header.width = static_cast<uint32_t>(image.width());
  out.bitstream.header.height = static_cast<uint32_t>(image.height());
  out.bitstream.z_segment = std::move(z_segment);
  out.bitstream.pass_segments = std::move(latent.segments);
  out.bytes = out.bitstream.Serialize();
  return out;
}

void Codec::CheckHeader(const BitstreamHeader& header) const {
  if (header.variant != static_cast<uint8_t>(config().variant)) {
    Fail(ErrorCode::kWeightMismatch,
         "bitstream variant does not match the loaded model");
  }
}

Codec::HyperState Codec::DecodeHyper(BitstreamReader& reader) const {
  CheckHeader(reader.header());
  const size_t ph = PaddedSize(reader.header().height);
  const size_t pw = PaddedSize(reader.header().width);
  HyperState s;
  s.z_hat = DecodeHyperLatent(
      reader.z_segment(), model_.hyper_prior(),
      Shape{config().n, ph / kHyperStride, pw / kHyperStride});
  s.psi = model_.hyper_synthesis().Forward(s.z_hat);
  return s;
}

Tensor Codec::FinishImage(const Tensor& padded, size_t height,
                          size_t width) const {
  return ClampUnit(Crop(padded, height, width));
}

DecodeOutput Codec::Decode(BitstreamReader& reader) const {
  const HyperState hyper = DecodeHyper(reader);
  const size_t groups = config().grouping.group_count();
  LatentDecoding latent = DecodeLatent(
      model_.context(), hyper.psi, groups,
      [&reader](size_t i) { return reader.pass_segment(i); });
  DecodeOutput out;
  out.y_hat = std::move(latent.y_hat);
  out.image = FinishImage(model_.synthesis().Forward(out.y_hat),
                          reader.header().height, reader.header().width);
  return out;
}

DecodeOutput Codec::Decode(std::span<const uint8_t> bytes) const {
  BitstreamReader reader(bytes);
  return Decode(reader);
}

Tensor Codec::DecodeLatentPrefix(BitstreamReader& reader, size_t groups,
                                 FillMode fill) const {
  const size_t total = config().grouping.group_count();
  if (groups < 1 || groups > total) {
    Fail(ErrorCode::kInvalidArgument,
         "progressive k must lie in [1, " + std::to_string(total) + "]");
  }
  const HyperState hyper = DecodeHyper(reader);
  LatentDecoding latent = DecodeLatent(
      model_.context(), hyper.psi, groups,
      [&reader](size_t i) { return reader.pass_segment(i); });
  if (fill == FillMode::kMean) {
    for (size_t k = groups; k < total; ++k) {
      WriteChannels(latent.y_hat, config().grouping.offset(k),
                    HyperpriorOnlyMeans(model_.context(), k, hyper.psi));
    }
  }
  return std::move(latent.y_hat);
}

Tensor Codec::DecodeThumbnail(BitstreamReader& reader) const {
  Tensor latent = DecodeLatentPrefix(reader, kThumbnailGroups, FillMode::kZero);
  const Tensor head = SliceChannels(
      latent, 0, config().grouping.offset(kThumbnailGroups));
  return FinishImage(model_.thumbnail().Forward(head),
                     (reader.header().height + 1) / 2,
                     (reader.header().width + 1) / 2);
}

ProgressiveOutput Codec::DecodeProgressive(
    BitstreamReader& reader, size_t k, const ProgressiveOptions& options) const {
  ProgressiveOutput out;
  out.latent = DecodeLatentPrefix(reader, k, options.fill);
  const size_t h = reader.header().height, w = reader.header().width;
  if (k == config().grouping.group_count() || options.full_synthesizer) {
    out.image = FinishImage(model_.synthesis().Forward(out.latent), h, w);
    return out;
  }
  out.thumbnail = true;
  const Tensor head = SliceChannels(
      out.latent, 0, config().grouping.offset(kThumbnailGroups));
  out.image = FinishImage(model_.thumbnail().Forward(head), (h + 1) / 2,
                          (w + 1) / 2);
  return out;
}

CompactionReport Codec::AnalyzeCompaction(const Tensor& image) const {
  const EncodeOutput enc = Encode(image);
  return AnalyzeLatent(enc.y_hat, enc.params);
}

CompactionReport AnalyzeLatent(const Tensor& y_hat,
                               const EntropyParams& params) {
  if (y_hat.shape() != params.mu.shape()) {
    Fail(ErrorCode::kInvalidArgument, "analyze: latent/params shape mismatch");
  }
  CompactionReport report;
  report.height = y_hat.height();
  report.width = y_hat.width();
  const double area = static_cast<double>(y_hat.shape().plane());
  for (size_t c = 0; c < y_hat.channels(); ++c) {
    double sum = 0.0;
    for (float v : y_hat.plane(c)) sum += static_cast<double>(v) * v;
    const Tensor yc = SliceChannels(y_hat, c, 1);
    const EntropyParams pc{SliceChannels(params.mu, c, 1),
                           SliceChannels(params.sigma, c, 1)};
    const double bits = EstimateBits(yc, pc);
    report.channels.push_back(ChannelStats{c, area > 0 ? sum / area : 0.0, bits});
    report.total_bits += bits;
  }
  std::stable_sort(report.channels.begin(), report.channels.end(),
                   [](const ChannelStats& a, const ChannelStats& b) {
                     return a.energy > b.energy;
                   });
  return report;
}

Tensor CompactionMagnitudes(const Tensor& y_hat) {
  float peak = 0.0f;
  for (float v : y_hat.values()) peak = std::max(peak, std::fabs(v));
  Tensor out(y_hat.shape());
  if (peak == 0.0f) return out;
  for (size_t i = 0; i < y_hat.size(); ++i) {
    out.data()[i] = std::fabs(y_hat.data()[i]) / peak;
  }
  return out;
}

std::string FormatCompactionReport(const CompactionReport& report) {
  std::string s = "rank  channel        energy          bits\n";
  char line[96];
  for (size_t i = 0; i < report.channels.size(); ++i) {
    const ChannelStats& c = report.channels[i];
    std::snprintf(line, sizeof(line), "%4zu  %7zu  %12.6g  %12.3f\n", i,
                  c.channel, c.energy, c.bits);
    s += line;
  }
  std::snprintf(line, sizeof(line), "total estimated bits: %.3f\n",
                report.total_bits);
  s += line;
  return s;
}

double Psnr(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape() || a.empty()) {
    Fail(ErrorCode::kInvalidArgument, "psnr: shape mismatch");
  }
  double sse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

}  // namespace elic
