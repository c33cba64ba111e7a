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

#ifndef ELIC_CODEC_H_
#define ELIC_CODEC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elic/bitstream.h"
#include "elic/entropy_model.h"
#include "elic/model.h"
#include "elic/scctx.h"
#include "elic/tensor.h"

namespace elic {

// Everything coded for one image: symbol records of the hyper-latent segment
// and of each pass segment.
struct CodingTrace {
  std::vector<CodedSymbol> z;
  SymbolTrace latent;
};

struct EncodeOutput {
  Bitstream bitstream;
  std::vector<uint8_t> bytes;
  Tensor y;  // analysis output before quantization
  Tensor y_hat;
  EntropyParams params;
  Tensor z_hat;
  EntropyParams z_params;
};

struct DecodeOutput {
  Tensor image;
  Tensor y_hat;
};

enum class FillMode { kZero, kMean };

struct ProgressiveOptions {
  FillMode fill = FillMode::kZero;
  // Route partial decodes through g_s instead of the thumbnail synthesizer.
  bool full_synthesizer = false;
};

struct ProgressiveOutput {
  Tensor image;
  Tensor latent;  // the y_hat fed to the synthesizer, with filled chunks
  bool thumbnail = false;
};

struct ChannelStats {
  size_t channel = 0;
  double energy = 0.0;  // mean of y_hat^2 over the latent grid
  double bits = 0.0;    // estimated bits of the channel
};

struct CompactionReport {
  size_t height = 0;
  size_t width = 0;
  double total_bits = 0.0;
  std::vector<ChannelStats> channels;  // sorted by decreasing energy
};

// Per-channel energy and estimated entropy of a latent.
CompactionReport AnalyzeLatent(const Tensor& y_hat, const EntropyParams& params);
// |y_hat| rescaled by the largest magnitude; zero when the latent is zero.
Tensor CompactionMagnitudes(const Tensor& y_hat);
std::string FormatCompactionReport(const CompactionReport& report);

inline constexpr double kPsnrCap = 99.0;
// PSNR in dB for [0, 1] images; identical inputs report kPsnrCap.
double Psnr(const Tensor& a, const Tensor& b);

size_t PaddedSize(size_t n);

class Codec {
 public:
  Codec(const ModelConfig& config, const WeightStore& weights);

  const Model& model() const { return model_; }
  const ModelConfig& config() const { return model_.config(); }

  // `image` is 3 x H x W with values in [0, 1].
  EncodeOutput Encode(const Tensor& image, CodingTrace* trace = nullptr) const;

  DecodeOutput Decode(BitstreamReader& reader) const;
  DecodeOutput Decode(std::span<const uint8_t> bytes) const;

  // Half-resolution preview from chunks 1..4; never touches later segments.
  Tensor DecodeThumbnail(BitstreamReader& reader) const;

  // Decodes chunks 1..k and fills the rest. k == K runs the full
  // synthesizer and matches Decode exactly.
  ProgressiveOutput DecodeProgressive(BitstreamReader& reader, size_t k,
                                      const ProgressiveOptions& options) const;

  // y_hat with chunks beyond `groups` filled per `fill`.
  Tensor DecodeLatentPrefix(BitstreamReader& reader, size_t groups,
                            FillMode fill) const;

  CompactionReport AnalyzeCompaction(const Tensor& image) const;

 private:
  struct HyperState {
    Tensor z_hat;
    Tensor psi;
  };
  HyperState DecodeHyper(BitstreamReader& reader) const;
  void CheckHeader(const BitstreamHeader& header) const;
  Tensor FinishImage(const Tensor& padded, size_t height, size_t width) const;

  Model model_;
};

}  // namespace elic

#endif  // ELIC_CODEC_H_
