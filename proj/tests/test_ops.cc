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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "elic/layers.h"
#include "elic/ops.h"
#include "elic/status.h"
#include "test_support.h"

namespace elic {
namespace {

using testing::NaiveConv;
using testing::RandomConv;
using testing::RandomTensor;

TEST_CASE("conv2d scalar affine") {
  ConvSpec spec = ConvSpec::Zeros(1, 1, 1, 1, 0);
  spec.weights = {2.0f};
  spec.bias = {1.0f};
  const Tensor out = Conv2d(Tensor(Shape{1, 1, 1}, 3.0f), spec);
  CHECK(out.shape() == Shape{1, 1, 1});
  CHECK(out.at(0, 0, 0) == 7.0f);
}

TEST_CASE("conv2d strided window overlap at corners") {
  ConvSpec spec = ConvSpec::Zeros(1, 1, 3, 2, 1);
  std::fill(spec.weights.begin(), spec.weights.end(), 1.0f);
  const Tensor out = Conv2d(Tensor(Shape{1, 4, 4}, 1.0f), spec);
  REQUIRE(out.shape() == Shape{1, 2, 2});
  // Hand-evaluated: the top-left window sees rows/cols {-1,0,1}, so 2x2 ones.
  CHECK(out.at(0, 0, 0) == 4.0f);
  CHECK(out.at(0, 0, 1) == 6.0f);
  CHECK(out.at(0, 1, 0) == 6.0f);
  CHECK(out.at(0, 1, 1) == 9.0f);
}

TEST_CASE("checkerboard mask ignores anchor-free input") {
  ConvSpec spec = RandomConv(2, 3, 5, 1, 2, 11);
  std::fill(spec.bias.begin(), spec.bias.end(), 0.0f);
  // Taps only where (i + j) is even relative to the kernel corner: anchors.
  spec.mask.assign(25, 0);
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) spec.mask[i * 5 + j] = (i + j) % 2 == 0;
  }
  Tensor in = RandomTensor(Shape{2, 6, 6}, 3);
  // Zero the input at every anchor position; the mask then only selects zeros
  // at output positions that are themselves anchors.
  for (size_t c = 0; c < 2; ++c) {
    for (size_t y = 0; y < 6; ++y) {
      for (size_t x = 0; x < 6; ++x) {
        if ((y + x) % 2 == 0) in.at(c, y, x) = 0.0f;
      }
    }
  }
  const Tensor out = Conv2d(in, spec);
  for (size_t c = 0; c < 3; ++c) {
    for (size_t y = 0; y < 6; ++y) {
      for (size_t x = 0; x < 6; ++x) {
        if ((y + x) % 2 == 0) CHECK(out.at(c, y, x) == 0.0f);
      }
    }
  }
}

TEST_CASE("conv2d matches per-element oracle bit-exactly") {
  struct Case {
    size_t in, out, k, s, p, h, w;
  };
  for (const Case& c : {Case{3, 4, 5, 2, 2, 9, 7}, Case{2, 2, 3, 1, 1, 5, 8},
                        Case{5, 3, 1, 1, 0, 4, 4}, Case{1, 2, 5, 1, 2, 1, 1},
                        Case{4, 2, 3, 2, 0, 6, 11}}) {
    const ConvSpec spec = RandomConv(c.in, c.out, c.k, c.s, c.p, c.h * 7 + c.w);
    const Tensor in = RandomTensor(Shape{c.in, c.h, c.w}, c.k + c.s);
    const Tensor fast = Conv2d(in, spec);
    CHECK(fast == NaiveConv(in, spec));
    for (size_t oc = 0; oc < c.out; ++oc) {
      CHECK(Conv2dAt(in, spec, oc, fast.height() - 1, 0) ==
            fast.at(oc, fast.height() - 1, 0));
    }
  }
}

TEST_CASE("conv2d output size and shape errors") {
  CHECK(ConvOutputSize(16, 5, 2, 2) == 8);
  CHECK(ConvOutputSize(17, 5, 2, 2) == 9);
  CHECK(ConvOutputSize(4, 3, 1, 1) == 4);
  const ConvSpec spec = ConvSpec::Zeros(2, 1, 3, 1, 1);
  CHECK_THROWS_AS(Conv2d(Tensor(Shape{3, 4, 4}), spec), Error);
  ConvSpec bad = spec;
  bad.weights.pop_back();
  CHECK_THROWS_AS(Conv2d(Tensor(Shape{2, 4, 4}), bad), Error);
}

TEST_CASE("conv2d is linear without bias") {
  ConvSpec spec = RandomConv(3, 2, 3, 1, 1, 5);
  std::fill(spec.bias.begin(), spec.bias.end(), 0.0f);
  const Tensor a = RandomTensor(Shape{3, 6, 5}, 1);
  const Tensor b = RandomTensor(Shape{3, 6, 5}, 2);
  const Tensor mix = Add(Scale(a, 0.75f), Scale(b, -1.5f));
  const Tensor lhs = Conv2d(mix, spec);
  const Tensor rhs = Add(Scale(Conv2d(a, spec), 0.75f), Scale(Conv2d(b, spec), -1.5f));
  for (size_t i = 0; i < lhs.size(); ++i) {
    CHECK(lhs.data()[i] ==
          doctest::Approx(rhs.data()[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("transposed conv single pixel expansion") {
  ConvSpec spec = ConvSpec::Zeros(1, 1, 2, 2, 0);
  spec.weights = {1.0f, 0.0f, 0.0f, 1.0f};
  const Tensor out = TransposedConv2d(Tensor(Shape{1, 1, 1}, 3.0f), spec);
  // Output padding of stride-1 adds one row and column of bias only.
  REQUIRE(out.shape() == Shape{1, 3, 3});
  CHECK(out.at(0, 0, 0) == 3.0f);
  CHECK(out.at(0, 0, 1) == 0.0f);
  CHECK(out.at(0, 1, 0) == 0.0f);
  CHECK(out.at(0, 1, 1) == 3.0f);
}

TEST_CASE("transposed conv doubles 5x5 stride-2 and matches scatter oracle") {
  for (auto [h, w] : {std::pair<size_t, size_t>{1, 1}, {3, 5}, {4, 4}, {2, 7}}) {
    CHECK(TransposedConvOutputSize(h, 5, 2, 2) == 2 * h);
    const ConvSpec spec = RandomConv(3, 2, 5, 2, 2, h * 10 + w);
    const Tensor in = RandomTensor(Shape{3, h, w}, h + w);
    const Tensor out = TransposedConv2d(in, spec);
    REQUIRE(out.shape() == Shape{2, 2 * h, 2 * w});
    const std::vector<double> ref =
        testing::NaiveTransposedConv(in, spec, 2 * h, 2 * w);
    for (size_t i = 0; i < out.size(); ++i) {
      CHECK(out.data()[i] == doctest::Approx(ref[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("transposed conv of zeros is the bias") {
  ConvSpec spec = RandomConv(2, 3, 5, 2, 2, 9);
  const Tensor out = TransposedConv2d(Tensor(Shape{2, 3, 4}), spec);
  for (size_t c = 0; c < 3; ++c) {
    for (float v : out.plane(c)) CHECK(v == spec.bias[c]);
  }
}

TEST_CASE("residual bottleneck") {
  SUBCASE("zero weights give the identity") {
    LayerFactory f;
    const ResidualBottleneck rb = ResidualBottleneck::Make(f, "rb", 192);
    const Tensor x = RandomTensor(Shape{192, 8, 8}, 4);
    const Tensor y = ApplyResidualBottleneck(x, rb);
    CHECK(y.shape() == Shape{192, 8, 8});
    CHECK(y == x);
  }
  SUBCASE("branch equals composed convs") {
    ResidualBottleneck rb;
    rb.reduce = RandomConv(8, 4, 1, 1, 0, 1);
    rb.conv = RandomConv(4, 4, 3, 1, 1, 2);
    rb.expand = RandomConv(4, 8, 1, 1, 0, 3);
    const Tensor x = RandomTensor(Shape{8, 5, 6}, 5);
    Tensor ref = NaiveConv(x, rb.reduce);
    ReluInPlace(ref);
    ref = NaiveConv(ref, rb.conv);
    ReluInPlace(ref);
    ref = NaiveConv(ref, rb.expand);
    const Tensor y = ApplyResidualBottleneck(x, rb);
    for (size_t i = 0; i < y.size(); ++i) {
      CHECK(y.data()[i] - x.data()[i] ==
            doctest::Approx(ref.data()[i]).epsilon(1e-5).scale(1.0));
    }
    CHECK(ResidualBranch(x, rb) == ref);
  }
  SUBCASE("odd width is rejected") {
    LayerFactory f;
    CHECK_THROWS_AS(ResidualBottleneck::Make(f, "rb", 7), Error);
  }
}

TEST_CASE("attention block") {
  LayerFactory f;
  AttentionBlock block = AttentionBlock::Make(f, "attn", 8);
  const Tensor x = RandomTensor(Shape{8, 4, 3}, 6);
  SUBCASE("zero weights scale by 1.5") {
    const Tensor y = ApplyAttention(x, block);
    REQUIRE(y.shape() == x.shape());
    for (size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == 1.5f * x.data()[i]);
  }
  SUBCASE("saturated mask passes the input through") {
    std::fill(block.mask_out.bias.begin(), block.mask_out.bias.end(), -200.0f);
    const Tensor y = ApplyAttention(x, block);
    for (size_t i = 0; i < y.size(); ++i) {
      CHECK(y.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-6));
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(ApplyAttention(RandomTensor(Shape{4, 2, 2}, 1), block), Error);
  }
}

TEST_CASE("gdn") {
  SUBCASE("unit beta, zero gamma is the identity") {
    const Tensor x = RandomTensor(Shape{3, 4, 4}, 8);
    const std::vector<float> beta(3, 1.0f), gamma(9, 0.0f);
    CHECK(Gdn(x, beta, gamma, false) == x);
    CHECK(Gdn(x, beta, gamma, true) == x);
  }
  SUBCASE("scalar evaluation") {
    const std::vector<float> beta = {1.0f}, gamma = {1.0f};
    const Tensor y = Gdn(Tensor(Shape{1, 1, 1}, 1.0f), beta, gamma, false);
    CHECK(y.at(0, 0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  }
  SUBCASE("inverse is finite with the same shape") {
    const Tensor x = RandomTensor(Shape{4, 3, 3}, 9, -3.0f, 3.0f);
    const std::vector<float> beta(4, 0.5f), gamma(16, 0.1f);
    const Tensor y = Gdn(Gdn(x, beta, gamma, false), beta, gamma, true);
    CHECK(y.shape() == x.shape());
    CHECK(y.AllFinite());
  }
  SUBCASE("parameter validation") {
    const Tensor x(Shape{1, 1, 1});
    CHECK_THROWS_AS(Gdn(x, std::vector<float>{0.0f}, std::vector<float>{0.0f}, false), Error);
    CHECK_THROWS_AS(Gdn(x, std::vector<float>{1.0f}, std::vector<float>{-1.0f}, false), Error);
  }
}

TEST_CASE("bilinear upsample") {
  const Tensor row(Shape{1, 1, 2}, std::vector<float>{0.0f, 2.0f});
  const Tensor up = BilinearUpsample2x(row);
  REQUIRE(up.shape() == Shape{1, 2, 4});
  for (size_t y = 0; y < 2; ++y) {
    CHECK(up.at(0, y, 0) == 0.0f);
    CHECK(up.at(0, y, 1) == 0.5f);
    CHECK(up.at(0, y, 2) == 1.5f);
    CHECK(up.at(0, y, 3) == 2.0f);
  }
  const Tensor flat = BilinearUpsample2x(Tensor(Shape{3, 5, 3}, 0.25f));
  CHECK(flat.shape() == Shape{3, 10, 6});
  for (float v : flat.values()) CHECK(v == 0.25f);
}

TEST_CASE("plumbing ops") {
  const Tensor a = RandomTensor(Shape{2, 3, 4}, 1);
  const Tensor b = RandomTensor(Shape{3, 3, 4}, 2);
  const Tensor cat = Concat({&a, &b});
  CHECK(cat.shape() == Shape{5, 3, 4});
  CHECK(SliceChannels(cat, 0, 2) == a);
  CHECK(SliceChannels(cat, 2, 3) == b);
  CHECK_THROWS_AS(Add(a, b), Error);

  Tensor r = a;
  ReluInPlace(r);
  for (float v : r.values()) CHECK(v >= 0.0f);

  const Tensor padded = ReplicatePad(a, 5, 7);
  CHECK(padded.at(1, 4, 6) == a.at(1, 2, 3));
  CHECK(padded.at(0, 0, 5) == a.at(0, 0, 3));
  CHECK(Crop(padded, 3, 4) == a);
  CHECK_THROWS_AS(ReplicatePad(a, 2, 4), Error);
}

TEST_CASE("tensor construction") {
  CHECK_THROWS_AS(Tensor(Shape{1, 2, 2}, std::vector<float>(3)), Error);
  Tensor t(Shape{1, 1, 2});
  CHECK(t.AllFinite());
  t.at(0, 0, 1) = std::nanf("");
  CHECK_FALSE(t.AllFinite());
}

TEST_CASE("four stride-2 convs and four tconvs restore padded dims") {
  for (auto [h, w] : {std::pair<size_t, size_t>{64, 64}, {128, 192}, {64, 320}}) {
    Tensor x(Shape{1, h, w}, 1.0f);
    for (int i = 0; i < 4; ++i) x = Conv2d(x, ConvSpec::Zeros(1, 1, 5, 2, 2));
    CHECK(x.shape() == Shape{1, h / 16, w / 16});
    for (int i = 0; i < 4; ++i) x = TransposedConv2d(x, ConvSpec::Zeros(1, 1, 5, 2, 2));
    CHECK(x.shape() == Shape{1, h, w});
  }
}

TEST_CASE("ops are deterministic") {
  const ConvSpec spec = RandomConv(4, 4, 5, 2, 2, 21);
  const Tensor in = RandomTensor(Shape{4, 13, 9}, 22);
  CHECK(Conv2d(in, spec) == Conv2d(in, spec));
  CHECK(TransposedConv2d(in, spec) == TransposedConv2d(in, spec));
}

}  // namespace
}  // namespace elic
