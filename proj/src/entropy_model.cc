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

#include "elic/entropy_model.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "elic/status.h"

namespace elic {
namespace {

// Upper tail of the standard normal.
double UpperTail(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double TailOutside(int radius, double sigma) {
  return 2.0 * UpperTail((radius + 0.5) / sigma);
}

}  // namespace

float ClampSigma(float sigma) {
  if (!(sigma >= kSigmaMin)) return kSigmaMin;  // also maps NaN to the floor
  return std::min(sigma, kSigmaMax);
}

EntropyParams MakeEntropyParams(Tensor mu, Tensor sigma) {
  Require(mu.shape() == sigma.shape(), ErrorCode::kInvalidArgument,
          "entropy params: mu/sigma shape mismatch");
  for (float& s : sigma.values()) s = ClampSigma(s);
  return EntropyParams{std::move(mu), std::move(sigma)};
}

double GaussianBinMass(double residual, double sigma) {
  const double d = std::fabs(residual);
  if (d < 0.5) {
    return 1.0 - UpperTail((0.5 - d) / sigma) - UpperTail((0.5 + d) / sigma);
  }
  return UpperTail((d - 0.5) / sigma) - UpperTail((d + 0.5) / sigma);
}

double SymbolLikelihood(double y, double mu, double sigma) {
  return std::max(GaussianBinMass(y - mu, sigma), kLikelihoodFloor);
}

Tensor Likelihood(const Tensor& y, const EntropyParams& params) {
  Require(y.shape() == params.mu.shape() && y.shape() == params.sigma.shape(),
          ErrorCode::kInvalidArgument, "likelihood: shape mismatch");
  Tensor out(y.shape());
  for (size_t i = 0; i < y.size(); ++i) {
    out.data()[i] = static_cast<float>(
        SymbolLikelihood(y.data()[i], params.mu.data()[i],
                         ClampSigma(params.sigma.data()[i])));
  }
  return out;
}

double EstimateBits(const Tensor& y, const EntropyParams& params) {
  Require(y.shape() == params.mu.shape() && y.shape() == params.sigma.shape(),
          ErrorCode::kInvalidArgument, "estimate bits: shape mismatch");
  double bits = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    bits -= std::log2(SymbolLikelihood(y.data()[i], params.mu.data()[i],
                                       ClampSigma(params.sigma.data()[i])));
  }
  return bits;
}

SymbolRange ChooseSupport(double sigma) {
  sigma = ClampSigma(static_cast<float>(sigma));
  // The 2^-16 two-sided tail sits near 4.42 sigma; start just inside it.
  int r = std::clamp(static_cast<int>(sigma * 4.3 - 0.5), 0,
                     kMaxSupportRadius);
  while (r > 0 && TailOutside(r - 1, sigma) <= kSupportTailMass) --r;
  while (r < kMaxSupportRadius && TailOutside(r, sigma) > kSupportTailMass) {
    ++r;
  }
  return SymbolRange{-r, r};
}

bool QuantizedCdf::IsValid() const {
  if (cdf.size() != support.size() + 2) return false;
  if (cdf.front() != 0 || cdf.back() != kCdfTotal) return false;
  for (size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i] <= cdf[i - 1]) return false;
  }
  return true;
}

void BuildCdfInto(double sigma, SymbolRange support, QuantizedCdf* out) {
  if (support.hi < support.lo) {
    Fail(ErrorCode::kInvalidArgument, "build cdf: empty support");
  }
  if (support.size() + 1 > kCdfTotal / 2) {
    Fail(ErrorCode::kInvalidArgument, "build cdf: support too large");
  }
  sigma = ClampSigma(static_cast<float>(sigma));
  const size_t n = support.size();
  const size_t buckets = n + 1;
  const double spread = static_cast<double>(kCdfTotal - buckets);

  out->support = support;
  out->cdf.resize(buckets + 1);
  std::vector<uint32_t>& cdf = out->cdf;

  // Frequencies first, converted to cumulative form below.
  uint64_t total = 0;
  size_t peak = 0;
  uint32_t peak_freq = 0;
  for (size_t i = 0; i < n; ++i) {
    const double mass = GaussianBinMass(support.lo + static_cast<int>(i), sigma);
    const uint32_t f = static_cast<uint32_t>(std::floor(mass * spread)) + 1;
    cdf[i + 1] = f;
    total += f;
    if (f > peak_freq) {
      peak_freq = f;
      peak = i;
    }
  }
  const double escape_mass = UpperTail((support.hi + 0.5) / sigma) +
                             UpperTail((0.5 - support.lo) / sigma);
  const uint32_t escape =
      static_cast<uint32_t>(std::floor(escape_mass * spread)) + 1;
  cdf[n + 1] = escape;
  total += escape;
  if (escape > peak_freq) peak = n;

  const int64_t leftover = static_cast<int64_t>(kCdfTotal) -
                           static_cast<int64_t>(total);
  const int64_t adjusted = static_cast<int64_t>(cdf[peak + 1]) + leftover;
  if (adjusted < 1) {
    Fail(ErrorCode::kInvalidArgument, "build cdf: cannot normalize table");
  }
  cdf[peak + 1] = static_cast<uint32_t>(adjusted);

  cdf[0] = 0;
  for (size_t i = 1; i <= buckets; ++i) cdf[i] += cdf[i - 1];
}

QuantizedCdf BuildCdf(double sigma, SymbolRange support) {
  QuantizedCdf cdf;
  BuildCdfInto(sigma, support, &cdf);
  return cdf;
}

EntropyParams FactorizedPrior::Broadcast(size_t height, size_t width) const {
  Require(mu.size() == sigma.size(), ErrorCode::kInvalidArgument,
          "factorized prior: mu/sigma length mismatch");
  const Shape shape{mu.size(), height, width};
  Tensor m(shape), s(shape);
  for (size_t c = 0; c < mu.size(); ++c) {
    std::fill(m.plane(c).begin(), m.plane(c).end(), mu[c]);
    std::fill(s.plane(c).begin(), s.plane(c).end(), sigma[c]);
  }
  return MakeEntropyParams(std::move(m), std::move(s));
}

}  // namespace elic
