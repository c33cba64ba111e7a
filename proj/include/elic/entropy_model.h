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

#ifndef ELIC_ENTROPY_MODEL_H_
#define ELIC_ENTROPY_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "elic/tensor.h"

namespace elic {

inline constexpr float kSigmaMin = 0.11f;
inline constexpr float kSigmaMax = 256.0f;
inline constexpr int kCdfPrecisionBits = 16;
inline constexpr uint32_t kCdfTotal = 1u << kCdfPrecisionBits;
inline constexpr int kMaxSupportRadius = 255;
inline constexpr int kEscapeRawBits = 16;
// Probability floor applied before taking logarithms: 2^-24.
inline constexpr double kLikelihoodFloor = 1.0 / 16777216.0;
// Support must hold all but this much Gaussian mass: 2^-16.
inline constexpr double kSupportTailMass = 1.0 / 65536.0;

float ClampSigma(float sigma);

// Mean-scale Gaussian parameters for a symbol tensor. Sigma is clamped to
// [kSigmaMin, kSigmaMax] on construction via MakeEntropyParams.
struct EntropyParams {
  Tensor mu;
  Tensor sigma;
};

EntropyParams MakeEntropyParams(Tensor mu, Tensor sigma);

// Mass of the unit-width bin centred at `residual` under N(0, sigma^2).
// Uses upper-tail differences so that far bins keep full relative precision.
double GaussianBinMass(double residual, double sigma);

// Probability of the quantized value y under N(mu, sigma^2) convolved with
// U(-0.5, 0.5), floored at kLikelihoodFloor.
double SymbolLikelihood(double y, double mu, double sigma);

Tensor Likelihood(const Tensor& y, const EntropyParams& params);

// Sum of -log2 SymbolLikelihood over every element.
double EstimateBits(const Tensor& y, const EntropyParams& params);

struct SymbolRange {
  int32_t lo = 0;
  int32_t hi = 0;
  size_t size() const { return static_cast<size_t>(hi - lo + 1); }
  bool Contains(int64_t v) const { return v >= lo && v <= hi; }
  bool operator==(const SymbolRange&) const = default;
};

// Smallest symmetric range [-r, r] whose complement carries at most
// kSupportTailMass, with r capped at kMaxSupportRadius.
SymbolRange ChooseSupport(double sigma);

// Cumulative frequency table over a centred integer support plus one escape
// bucket. `cdf` has support.size() + 2 boundaries: cdf[0] = 0,
// cdf[support.size()] starts the escape bucket, cdf.back() = kCdfTotal.
// Every bucket holds at least one count.
struct QuantizedCdf {
  SymbolRange support;
  std::vector<uint32_t> cdf;

  size_t bucket_count() const { return cdf.size() - 1; }
  size_t escape_index() const { return cdf.size() - 2; }
  uint32_t frequency(size_t bucket) const {
    return cdf[bucket + 1] - cdf[bucket];
  }
  // Bucket used to code v: its support slot or the escape bucket.
  size_t BucketFor(int64_t v) const {
    return support.Contains(v) ? static_cast<size_t>(v - support.lo)
                               : escape_index();
  }
  bool IsValid() const;
};

// Quantizes the centred Gaussian bin masses to kCdfTotal counts. Each bucket
// gets floor(p * (total - buckets)) + 1 counts and the remainder goes to the
// most probable bucket, which keeps symmetric supports exactly symmetric.
QuantizedCdf BuildCdf(double sigma, SymbolRange support);
void BuildCdfInto(double sigma, SymbolRange support, QuantizedCdf* out);

// Per-channel Gaussian model for the hyper-latent z.
struct FactorizedPrior {
  std::vector<float> mu;
  std::vector<float> sigma;

  size_t channels() const { return mu.size(); }
  // Broadcasts the per-channel parameters over an H x W grid.
  EntropyParams Broadcast(size_t height, size_t width) const;
};

}  // namespace elic

#endif  // ELIC_ENTROPY_MODEL_H_
