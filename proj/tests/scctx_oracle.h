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

// Brute-force sequential reference decoder for the context model. It decodes
// one location at a time in raster order, re-evaluating every network from
// scratch on the current state (which already holds symbols decoded earlier
// in the same pass), one output element at a time.

#ifndef ELIC_TESTS_SCCTX_ORACLE_H_
#define ELIC_TESTS_SCCTX_ORACLE_H_

#include <cmath>
#include <vector>

#include "elic/entropy_model.h"
#include "elic/range_coder.h"
#include "elic/scctx.h"
#include "test_support.h"

namespace elic::testing {

struct OracleResult {
  Tensor y_hat;
  std::vector<std::vector<int32_t>> symbols;  // per pass, in coding order
};

inline float OracleScale(float raw) {
  const float softplus = raw > 20.0f ? raw : std::log1p(std::exp(raw));
  return ClampSigma(softplus);
}

// 1x1 convolution of a single feature vector.
inline std::vector<float> PointConv(const std::vector<float>& in,
                                    const ConvSpec& spec, bool relu) {
  std::vector<float> out(spec.out_channels);
  for (size_t oc = 0; oc < spec.out_channels; ++oc) {
    float acc = spec.bias[oc];
    for (size_t ic = 0; ic < spec.in_channels; ++ic) {
      acc += spec.weights[oc * spec.in_channels + ic] * in[ic];
    }
    out[oc] = relu && acc < 0.0f ? 0.0f : acc;
  }
  return out;
}

// Entropy parameters (mu, sigma) of chunk k at one location given the state.
inline std::pair<std::vector<float>, std::vector<float>> OracleParamsAt(
    const ContextModel& model, const std::vector<Tensor>& chunks,
    const Tensor& psi, size_t k, bool anchor, size_t y, size_t x) {
  const GroupingScheme& g = model.grouping();
  const GroupNetworks& net = model.networks(k);
  const size_t c = g.chunk_sizes[k];
  const size_t h = psi.height(), w = psi.width();
  std::vector<float> feat;
  for (size_t oc = 0; oc < 2 * c; ++oc) {
    feat.push_back(anchor ? 0.0f : NaiveConvAt(chunks[k], net.spatial, oc, y, x));
  }
  if (k == 0) {
    feat.insert(feat.end(), 2 * c, 0.0f);
  } else {
    Tensor prior(Shape{g.offset(k), h, w});
    for (size_t j = 0; j < k; ++j) {
      for (size_t cc = 0; cc < g.chunk_sizes[j]; ++cc) {
        for (size_t yy = 0; yy < h; ++yy) {
          for (size_t xx = 0; xx < w; ++xx) {
            prior.at(g.offset(j) + cc, yy, xx) = chunks[j].at(cc, yy, xx);
          }
        }
      }
    }
    Tensor hidden = NaiveConv(prior, net.channel_in);
    for (float& v : hidden.values()) v = v > 0.0f ? v : 0.0f;
    for (size_t oc = 0; oc < 2 * c; ++oc) {
      feat.push_back(NaiveConvAt(hidden, net.channel_out, oc, y, x));
    }
  }
  for (size_t pc = 0; pc < psi.channels(); ++pc) feat.push_back(psi.at(pc, y, x));
  std::vector<float> t = PointConv(feat, net.aggregate_in, true);
  t = PointConv(t, net.aggregate_mid, true);
  t = PointConv(t, net.aggregate_out, false);
  std::vector<float> mu(t.begin(), t.begin() + c);
  std::vector<float> sigma(c);
  for (size_t i = 0; i < c; ++i) sigma[i] = OracleScale(t[c + i]);
  return {mu, sigma};
}

inline OracleResult SerialDecode(const ContextModel& model, const Tensor& psi,
                                 const std::vector<std::vector<uint8_t>>& segments) {
  const GroupingScheme& g = model.grouping();
  const size_t h = psi.height(), w = psi.width();
  std::vector<Tensor> chunks;
  for (size_t c : g.chunk_sizes) chunks.emplace_back(Shape{c, h, w});
  OracleResult result;
  result.symbols.resize(2 * g.group_count());
  for (size_t k = 0; k < g.group_count(); ++k) {
    for (int phase = 0; phase < 2; ++phase) {
      const size_t pass = 2 * k + phase;
      const bool anchor = phase == 0;
      RangeDecoder dec(segments[pass]);
      for (size_t y = 0; y < h; ++y) {
        for (size_t x = 0; x < w; ++x) {
          if (((y + x) % 2 == 0) != anchor) continue;
          const auto [mu, sigma] = OracleParamsAt(model, chunks, psi, k, anchor, y, x);
          for (size_t c = 0; c < g.chunk_sizes[k]; ++c) {
            const QuantizedCdf cdf = BuildCdf(sigma[c], ChooseSupport(sigma[c]));
            const int32_t q = DecodeSymbol(dec, cdf);
            result.symbols[pass].push_back(q);
            chunks[k].at(c, y, x) = static_cast<float>(q) + mu[c];
          }
        }
      }
    }
  }
  result.y_hat = Tensor(Shape{g.total(), h, w});
  for (size_t k = 0; k < chunks.size(); ++k) {
    for (size_t c = 0; c < g.chunk_sizes[k]; ++c) {
      for (size_t y = 0; y < h; ++y) {
        for (size_t x = 0; x < w; ++x) {
          result.y_hat.at(g.offset(k) + c, y, x) = chunks[k].at(c, y, x);
        }
      }
    }
  }
  return result;
}

}  // namespace elic::testing

#endif  // ELIC_TESTS_SCCTX_ORACLE_H_
