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

#include "elic/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "elic/status.h"

namespace elic {
namespace {

// Weights with the optional kernel mask folded in.
std::vector<float> EffectiveWeights(const ConvSpec& spec) {
  if (spec.mask.empty()) return spec.weights;
  std::vector<float> w = spec.weights;
  const size_t taps = spec.kernel_h * spec.kernel_w;
  for (size_t i = 0; i < w.size(); ++i) {
    if (spec.mask[i % taps] == 0) w[i] = 0.0f;
  }
  return w;
}

void CheckInput(const Tensor& input, const ConvSpec& spec) {
  spec.Validate();
  if (input.channels() != spec.in_channels) {
    Fail(ErrorCode::kInvalidArgument,
         "conv expects " + std::to_string(spec.in_channels) +
             " input channels, got " + input.shape().ToString());
  }
}

// Range [lo, hi) of output indices o such that o * stride + offset lies in
// [0, extent).
void ValidRange(ptrdiff_t offset, size_t stride, size_t extent, size_t count,
                size_t* lo, size_t* hi) {
  const ptrdiff_t s = static_cast<ptrdiff_t>(stride);
  ptrdiff_t first = 0;
  if (offset < 0) first = (-offset + s - 1) / s;
  const ptrdiff_t last_in = static_cast<ptrdiff_t>(extent) - 1 - offset;
  ptrdiff_t end = last_in < 0 ? 0 : last_in / s + 1;
  end = std::min<ptrdiff_t>(end, static_cast<ptrdiff_t>(count));
  *lo = static_cast<size_t>(std::min(first, end));
  *hi = static_cast<size_t>(end);
}

}  // namespace

void ConvSpec::Validate() const {
  if (in_channels == 0 || out_channels == 0 || kernel_h == 0 ||
      kernel_w == 0) {
    Fail(ErrorCode::kInvalidArgument, "conv dimensions must be positive");
  }
  if (stride == 0) Fail(ErrorCode::kInvalidArgument, "conv stride must be >= 1");
  if (weights.size() != WeightCount()) {
    Fail(ErrorCode::kInvalidArgument,
         "conv weight count " + std::to_string(weights.size()) +
             " != out*in*kh*kw = " + std::to_string(WeightCount()));
  }
  if (bias.size() != out_channels) {
    Fail(ErrorCode::kInvalidArgument, "conv bias length must equal out_channels");
  }
  if (!mask.empty() && mask.size() != kernel_h * kernel_w) {
    Fail(ErrorCode::kInvalidArgument, "conv mask must have kh*kw entries");
  }
}

ConvSpec ConvSpec::Zeros(size_t in, size_t out, size_t kernel, size_t stride,
                         size_t padding) {
  ConvSpec spec;
  spec.in_channels = in;
  spec.out_channels = out;
  spec.kernel_h = kernel;
  spec.kernel_w = kernel;
  spec.stride = stride;
  spec.padding = padding;
  spec.weights.assign(spec.WeightCount(), 0.0f);
  spec.bias.assign(out, 0.0f);
  return spec;
}

size_t ConvOutputSize(size_t in, size_t kernel, size_t stride, size_t padding) {
  if (in + 2 * padding < kernel) {
    Fail(ErrorCode::kInvalidArgument, "conv input smaller than kernel");
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

size_t TransposedConvOutputSize(size_t in, size_t kernel, size_t stride,
                                size_t padding) {
  const size_t full = (in - 1) * stride + kernel + (stride - 1);
  if (in == 0 || full < 2 * padding) {
    Fail(ErrorCode::kInvalidArgument, "transposed conv output would be empty");
  }
  return full - 2 * padding;
}

Tensor Conv2d(const Tensor& input, const ConvSpec& spec) {
  CheckInput(input, spec);
  const size_t in_h = input.height(), in_w = input.width();
  const size_t kh = spec.kernel_h, kw = spec.kernel_w;
  const size_t s = spec.stride;
  const ptrdiff_t pad = static_cast<ptrdiff_t>(spec.padding);
  const size_t out_h = ConvOutputSize(in_h, kh, s, spec.padding);
  const size_t out_w = ConvOutputSize(in_w, kw, s, spec.padding);
  const std::vector<float> weights = EffectiveWeights(spec);

  Tensor out(Shape{spec.out_channels, out_h, out_w});
  for (size_t oc = 0; oc < spec.out_channels; ++oc) {
    float* __restrict dst = out.plane(oc).data();
    std::fill_n(dst, out_h * out_w, spec.bias[oc]);
    for (size_t ic = 0; ic < spec.in_channels; ++ic) {
      const float* src = input.plane(ic).data();
      const float* w = &weights[(oc * spec.in_channels + ic) * kh * kw];
      for (size_t ky = 0; ky < kh; ++ky) {
        size_t y_lo, y_hi;
        ValidRange(static_cast<ptrdiff_t>(ky) - pad, s, in_h, out_h, &y_lo,
                   &y_hi);
        for (size_t kx = 0; kx < kw; ++kx) {
          const float tap = w[ky * kw + kx];
          const ptrdiff_t x_off = static_cast<ptrdiff_t>(kx) - pad;
          size_t x_lo, x_hi;
          ValidRange(x_off, s, in_w, out_w, &x_lo, &x_hi);
          for (size_t oy = y_lo; oy < y_hi; ++oy) {
            const size_t iy = oy * s + ky - spec.padding;
            if (x_lo == x_hi) continue;
            float* __restrict row = dst + oy * out_w + x_lo;
            const float* __restrict in_row =
                src + iy * in_w + static_cast<size_t>(
                                      static_cast<ptrdiff_t>(x_lo * s) + x_off);
            const size_t n = x_hi - x_lo;
            if (s == 1) {
              for (size_t j = 0; j < n; ++j) row[j] += tap * in_row[j];
            } else {
              for (size_t j = 0; j < n; ++j) row[j] += tap * in_row[j * s];
            }
          }
        }
      }
    }
  }
  return out;
}

float Conv2dAt(const Tensor& input, const ConvSpec& spec, size_t out_channel,
               size_t y, size_t x) {
  CheckInput(input, spec);
  const ptrdiff_t pad = static_cast<ptrdiff_t>(spec.padding);
  const size_t taps = spec.kernel_h * spec.kernel_w;
  float acc = spec.bias[out_channel];
  for (size_t ic = 0; ic < spec.in_channels; ++ic) {
    for (size_t ky = 0; ky < spec.kernel_h; ++ky) {
      const ptrdiff_t iy = static_cast<ptrdiff_t>(y * spec.stride + ky) - pad;
      if (iy < 0 || iy >= static_cast<ptrdiff_t>(input.height())) continue;
      for (size_t kx = 0; kx < spec.kernel_w; ++kx) {
        const ptrdiff_t ix =
            static_cast<ptrdiff_t>(x * spec.stride + kx) - pad;
        if (ix < 0 || ix >= static_cast<ptrdiff_t>(input.width())) continue;
        const size_t tap = ky * spec.kernel_w + kx;
        float w = spec.weights[(out_channel * spec.in_channels + ic) * taps +
                               tap];
        if (!spec.mask.empty() && spec.mask[tap] == 0) w = 0.0f;
        acc += w * input.at(ic, iy, ix);
      }
    }
  }
  return acc;
}

Tensor TransposedConv2d(const Tensor& input, const ConvSpec& spec) {
  CheckInput(input, spec);
  const size_t in_h = input.height(), in_w = input.width();
  const size_t kh = spec.kernel_h, kw = spec.kernel_w;
  const size_t s = spec.stride;
  const ptrdiff_t pad = static_cast<ptrdiff_t>(spec.padding);
  const size_t out_h = TransposedConvOutputSize(in_h, kh, s, spec.padding);
  const size_t out_w = TransposedConvOutputSize(in_w, kw, s, spec.padding);
  const std::vector<float> weights = EffectiveWeights(spec);

  Tensor out(Shape{spec.out_channels, out_h, out_w});
  for (size_t oc = 0; oc < spec.out_channels; ++oc) {
    float* __restrict dst = out.plane(oc).data();
    std::fill_n(dst, out_h * out_w, spec.bias[oc]);
    for (size_t ic = 0; ic < spec.in_channels; ++ic) {
      const float* __restrict src = input.plane(ic).data();
      const float* w = &weights[(oc * spec.in_channels + ic) * kh * kw];
      for (size_t ky = 0; ky < kh; ++ky) {
        for (size_t kx = 0; kx < kw; ++kx) {
          const float tap = w[ky * kw + kx];
          for (size_t iy = 0; iy < in_h; ++iy) {
            const ptrdiff_t oy =
                static_cast<ptrdiff_t>(iy * s + ky) - pad;
            if (oy < 0 || oy >= static_cast<ptrdiff_t>(out_h)) continue;
            float* __restrict row = dst + oy * out_w;
            const float* __restrict in_row = src + iy * in_w;
            for (size_t ix = 0; ix < in_w; ++ix) {
              const ptrdiff_t ox =
                  static_cast<ptrdiff_t>(ix * s + kx) - pad;
              if (ox < 0 || ox >= static_cast<ptrdiff_t>(out_w)) continue;
              row[ox] += tap * in_row[ix];
            }
          }
        }
      }
    }
  }
  return out;
}

void ReluInPlace(Tensor& t) {
  for (float& v : t.values()) v = v > 0.0f ? v : 0.0f;
}

Tensor Relu(Tensor t) {
  ReluInPlace(t);
  return t;
}

Tensor Sigmoid(Tensor t) {
  for (float& v : t.values()) v = 1.0f / (1.0f + std::exp(-v));
  return t;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  Require(a.shape() == b.shape(), ErrorCode::kInvalidArgument,
          "add: shape mismatch");
  Tensor out = a;
  auto dst = out.values();
  auto src = b.values();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Tensor Multiply(const Tensor& a, const Tensor& b) {
  Require(a.shape() == b.shape(), ErrorCode::kInvalidArgument,
          "multiply: shape mismatch");
  Tensor out = a;
  auto dst = out.values();
  auto src = b.values();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
  return out;
}

Tensor Scale(Tensor t, float factor) {
  for (float& v : t.values()) v *= factor;
  return t;
}

Tensor Concat(std::initializer_list<const Tensor*> parts) {
  Require(parts.size() > 0, ErrorCode::kInvalidArgument,
          "concat: no inputs");
  const Shape first = (*parts.begin())->shape();
  size_t channels = 0;
  for (const Tensor* t : parts) {
    if (t->height() != first.height || t->width() != first.width) {
      Fail(ErrorCode::kInvalidArgument,
           "concat: spatial mismatch " + t->shape().ToString() + " vs " +
               first.ToString());
    }
    channels += t->channels();
  }
  Tensor out(Shape{channels, first.height, first.width});
  float* dst = out.data();
  for (const Tensor* t : parts) {
    dst = std::copy(t->values().begin(), t->values().end(), dst);
  }
  return out;
}

Tensor SliceChannels(const Tensor& t, size_t begin, size_t count) {
  Require(begin + count <= t.channels(), ErrorCode::kInvalidArgument,
          "slice: channel range out of bounds");
  const size_t plane = t.shape().plane();
  std::vector<float> data(t.data() + begin * plane,
                          t.data() + (begin + count) * plane);
  return Tensor(Shape{count, t.height(), t.width()}, std::move(data));
}

void WriteChannels(Tensor& dst, size_t begin, const Tensor& src) {
  Require(src.height() == dst.height() && src.width() == dst.width() &&
              begin + src.channels() <= dst.channels(),
          ErrorCode::kInvalidArgument, "write channels: shape mismatch");
  std::copy(src.values().begin(), src.values().end(),
            dst.data() + begin * dst.shape().plane());
}

Tensor Crop(const Tensor& t, size_t height, size_t width) {
  Require(height <= t.height() && width <= t.width(),
          ErrorCode::kInvalidArgument, "crop: target larger than input");
  Tensor out(Shape{t.channels(), height, width});
  for (size_t c = 0; c < t.channels(); ++c) {
    for (size_t y = 0; y < height; ++y) {
      const float* src = &t.plane(c)[y * t.width()];
      std::copy(src, src + width, &out.plane(c)[y * width]);
    }
  }
  return out;
}

Tensor ReplicatePad(const Tensor& t, size_t height, size_t width) {
  Require(height >= t.height() && width >= t.width() && !t.empty(),
          ErrorCode::kInvalidArgument, "pad: target smaller than input");
  Tensor out(Shape{t.channels(), height, width});
  for (size_t c = 0; c < t.channels(); ++c) {
    for (size_t y = 0; y < height; ++y) {
      const size_t sy = std::min(y, t.height() - 1);
      for (size_t x = 0; x < width; ++x) {
        out.at(c, y, x) = t.at(c, sy, std::min(x, t.width() - 1));
      }
    }
  }
  return out;
}

Tensor BilinearUpsample2x(const Tensor& input) {
  Require(input.height() >= 1 && input.width() >= 1,
          ErrorCode::kInvalidArgument, "upsample: empty input");
  const size_t h = input.height(), w = input.width();
  // Each output index o samples source coordinate (o + 0.5) / 2 - 0.5.
  struct Tap {
    size_t i0, i1;
    float frac;
  };
  auto taps = [](size_t n) {
    std::vector<Tap> t(2 * n);
    for (size_t o = 0; o < 2 * n; ++o) {
      float src = (static_cast<float>(o) + 0.5f) * 0.5f - 0.5f;
      if (src < 0.0f) src = 0.0f;
      const size_t i0 = std::min(static_cast<size_t>(src), n - 1);
      const size_t i1 = std::min(i0 + 1, n - 1);
      t[o] = Tap{i0, i1, src - static_cast<float>(i0)};
    }
    return t;
  };
  const std::vector<Tap> ty = taps(h), tx = taps(w);
  Tensor out(Shape{input.channels(), 2 * h, 2 * w});
  for (size_t c = 0; c < input.channels(); ++c) {
    for (size_t oy = 0; oy < 2 * h; ++oy) {
      const Tap& a = ty[oy];
      for (size_t ox = 0; ox < 2 * w; ++ox) {
        const Tap& b = tx[ox];
        const float top = input.at(c, a.i0, b.i0) * (1.0f - b.frac) +
                          input.at(c, a.i0, b.i1) * b.frac;
        const float bottom = input.at(c, a.i1, b.i0) * (1.0f - b.frac) +
                             input.at(c, a.i1, b.i1) * b.frac;
        out.at(c, oy, ox) = top * (1.0f - a.frac) + bottom * a.frac;
      }
    }
  }
  return out;
}

Tensor Gdn(const Tensor& input, std::span<const float> beta,
           std::span<const float> gamma, bool inverse) {
  const size_t c = input.channels();
  Require(beta.size() == c && gamma.size() == c * c,
          ErrorCode::kInvalidArgument, "gdn: parameter shape mismatch");
  for (float b : beta) {
    Require(b > 0.0f, ErrorCode::kInvalidArgument, "gdn: beta must be > 0");
  }
  for (float g : gamma) {
    Require(g >= 0.0f, ErrorCode::kInvalidArgument, "gdn: gamma must be >= 0");
  }
  Tensor out(input.shape());
  const size_t plane = input.shape().plane();
  std::vector<float> norm(plane);
  for (size_t i = 0; i < c; ++i) {
    std::fill(norm.begin(), norm.end(), beta[i]);
    for (size_t j = 0; j < c; ++j) {
      const float g = gamma[i * c + j];
      const float* x = input.plane(j).data();
      for (size_t p = 0; p < plane; ++p) norm[p] += g * x[p] * x[p];
    }
    const float* x = input.plane(i).data();
    float* y = out.plane(i).data();
    for (size_t p = 0; p < plane; ++p) {
      const float d = std::sqrt(norm[p]);
      y[p] = inverse ? x[p] * d : x[p] / d;
    }
  }
  return out;
}

}  // namespace elic
