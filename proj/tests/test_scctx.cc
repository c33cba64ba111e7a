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

#include "elic/model.h"
#include "elic/scctx.h"
#include "elic/status.h"
#include "scctx_oracle.h"
#include "test_support.h"

namespace elic {
namespace {

using testing::RandomTensor;

struct Fixture {
  ModelConfig config;
  Model model;
  Tensor psi;
  Tensor y;

  Fixture(size_t h, size_t w, uint64_t seed, size_t m = 144)
      : config(MakeConfig(Variant::kElic, 16, m)),
        model(config, RandomWeights(config, seed)),
        psi(RandomTensor(Shape{2 * m, h, w}, seed + 1, -2.0f, 2.0f)),
        y(RandomTensor(Shape{m, h, w}, seed + 2, -4.0f, 4.0f)) {}

  const ContextModel& ctx() const { return model.context(); }
};

TEST_CASE("uneven grouping") {
  CHECK(MakeGrouping(320).chunk_sizes == std::vector<size_t>{16, 16, 32, 64, 192});
  CHECK(MakeGrouping(129).chunk_sizes == std::vector<size_t>{16, 16, 32, 64, 1});
  CHECK_THROWS_AS(MakeGrouping(128), Error);
  CHECK(MakeGrouping(320).total() == 320);
  CHECK(MakeGrouping(320).offset(4) == 128);
  CHECK(MakeEvenGrouping(320, 10).chunk_sizes == std::vector<size_t>(10, 32));
}

TEST_CASE("schedule arithmetic") {
  const DecodeSchedule s = MakeSchedule(MakeGrouping(320), 16, 16);
  REQUIRE(s.passes.size() == 10);
  CHECK(s.passes[0].symbols() == 2048);
  CHECK(s.passes[0].symbols() == 8 * 16 * 16);
  CHECK(s.passes[9].symbols() == 96 * 16 * 16);
  for (size_t i = 0; i < 10; ++i) {
    CHECK(s.passes[i].group == i / 2);
    CHECK(s.passes[i].phase == (i % 2 ? Phase::kNonAnchor : Phase::kAnchor));
  }
  const DecodeSchedule one = MakeSchedule(MakeGrouping(320), 1, 1);
  CHECK(one.passes[0].locations == 1);
  CHECK(one.passes[1].locations == 0);
  const DecodeSchedule odd = MakeSchedule(MakeGrouping(144), 3, 5);
  CHECK(odd.passes[0].locations == 8);
  CHECK(odd.passes[1].locations == 7);
  // Anchor and non-anchor sets partition the grid.
  auto a = odd.Locations(Phase::kAnchor), n = odd.Locations(Phase::kNonAnchor);
  CHECK(a.size() + n.size() == 15);
  for (auto [y, x] : a) CHECK(IsAnchor(y, x));
  for (auto [y, x] : n) CHECK_FALSE(IsAnchor(y, x));
  CHECK(a.front() == std::pair<size_t, size_t>{0, 0});
  CHECK(n.front() == std::pair<size_t, size_t>{0, 1});
}

TEST_CASE("checkerboard mask") {
  const std::vector<uint8_t> mask = CheckerboardMask();
  REQUIRE(mask.size() == 25);
  CHECK(mask[12] == 0);
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) CHECK(mask[i * 5 + j] == ((i + j) % 2 == 1));
  }
}

TEST_CASE("context network widths at paper scale") {
  LayerFactory f;
  const ContextModel ctx = ContextModel::Make(f, MakeGrouping(320), 320);
  CHECK(ctx.networks(0).aggregate_in.in_channels == 704);
  CHECK(ctx.networks(0).aggregate_out.out_channels == 32);
  CHECK(ctx.networks(4).channel_out.out_channels == 384);
  CHECK(ctx.networks(4).channel_in.in_channels == 128);
  CHECK_FALSE(ctx.networks(0).has_channel_context);
  std::vector<Tensor> chunks;
  for (size_t c : {16, 16, 32, 64}) chunks.emplace_back(Shape{c, 3, 2});
  const Tensor phi = ctx.ChannelContext(4, chunks, 3, 2);
  CHECK(phi.shape() == Shape{384, 3, 2});
  const Tensor first = ctx.ChannelContext(0, {}, 3, 2);
  CHECK(first.shape() == Shape{32, 3, 2});
  for (float v : first.values()) CHECK(v == 0.0f);
}

TEST_CASE("channel context of zero chunks is the bias") {
  Fixture fx(4, 5, 3);
  std::vector<Tensor> zeros;
  for (size_t c : fx.config.grouping.chunk_sizes) zeros.emplace_back(Shape{c, 4, 5});
  const GroupNetworks& net = fx.ctx().networks(2);
  const Tensor phi = fx.ctx().ChannelContext(2, zeros, 4, 5);
  // hidden = relu(bias_in) everywhere; interior outputs see the full window.
  std::vector<float> hidden(net.channel_in.out_channels);
  for (size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::max(0.0f, net.channel_in.bias[i]);
  Tensor h(Shape{hidden.size(), 4, 5});
  for (size_t c = 0; c < hidden.size(); ++c) {
    for (float& v : h.plane(c)) v = hidden[c];
  }
  CHECK(phi == testing::NaiveConv(h, net.channel_out));
  ModelConfig cfg = fx.config;
  LayerFactory zero_factory;
  const ContextModel zero_ctx = ContextModel::Make(zero_factory, cfg.grouping, cfg.m);
  const Tensor zero_phi = zero_ctx.ChannelContext(2, zeros, 4, 5);
  for (float v : zero_phi.values()) CHECK(v == 0.0f);
}

TEST_CASE("spatial context") {
  Fixture fx(6, 6, 5);
  const size_t c = fx.config.grouping.chunk_sizes[1];
  const Tensor partial = RandomTensor(Shape{c, 6, 6}, 9);
  const Tensor anchor_out = fx.ctx().SpatialContext(1, Phase::kAnchor, partial);
  for (float v : anchor_out.values()) CHECK(v == 0.0f);
  const Tensor zero_out = fx.ctx().SpatialContext(1, Phase::kNonAnchor, Tensor(Shape{c, 6, 6}));
  for (size_t oc = 0; oc < 2 * c; ++oc) {
    for (float v : zero_out.plane(oc)) CHECK(v == fx.ctx().networks(1).spatial.bias[oc]);
  }
  SUBCASE("non-anchor outputs ignore non-anchor inputs") {
    const Tensor base = fx.ctx().SpatialContext(1, Phase::kNonAnchor, partial);
    for (size_t py = 0; py < 6; ++py) {
      for (size_t px = 0; px < 6; ++px) {
        if (IsAnchor(py, px)) continue;
        Tensor probe = partial;
        probe.at(3, py, px) += 10.0f;
        const Tensor out = fx.ctx().SpatialContext(1, Phase::kNonAnchor, probe);
        for (size_t oc = 0; oc < 2 * c; ++oc) {
          for (size_t y = 0; y < 6; ++y) {
            for (size_t x = 0; x < 6; ++x) {
              if (!IsAnchor(y, x)) REQUIRE(out.at(oc, y, x) == base.at(oc, y, x));
            }
          }
        }
      }
    }
  }
  CHECK_THROWS_AS(fx.ctx().SpatialContext(1, Phase::kNonAnchor, Tensor(Shape{c + 1, 6, 6})), Error);
}

TEST_CASE("aggregate with zero weights") {
  LayerFactory f;
  const ContextModel ctx = ContextModel::Make(f, MakeGrouping(144), 144);
  const Tensor zeros(Shape{32, 2, 2});
  const EntropyParams p = ctx.Aggregate(0, zeros, zeros, Tensor(Shape{288, 2, 2}, 1.0f));
  CHECK(p.mu.shape() == Shape{16, 2, 2});
  for (float v : p.mu.values()) CHECK(v == 0.0f);
  for (float v : p.sigma.values()) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK_THROWS_AS(ctx.Aggregate(0, zeros, zeros, Tensor(Shape{287, 2, 2})), Error);
}

TEST_CASE("encode and decode latent round-trip with pass counts") {
  for (auto [h, w] : {std::pair<size_t, size_t>{1, 1}, {3, 4}, {5, 7}}) {
    Fixture fx(h, w, h * 31 + w);
    SymbolTrace trace;
    const LatentEncoding enc = EncodeLatent(fx.ctx(), fx.y, fx.psi, &trace);
    const DecodeSchedule schedule = MakeSchedule(fx.config.grouping, h, w);
    REQUIRE(trace.passes.size() == 10);
    for (size_t i = 0; i < 10; ++i) CHECK(trace.passes[i].size() == schedule.passes[i].symbols());
    const LatentDecoding dec = DecodeLatent(
        fx.ctx(), fx.psi, 5, [&](size_t i) { return std::span<const uint8_t>(enc.segments[i]); });
    CHECK(dec.y_hat == enc.y_hat);
    CHECK(dec.params.mu == enc.params.mu);
    for (size_t i = 0; i < fx.y.size(); ++i) {
      CHECK(std::fabs(enc.y_hat.data()[i] - fx.y.data()[i]) <= 0.5f + 1e-5f);
    }
  }
}

TEST_CASE("state after an anchor pass holds only anchors") {
  Fixture fx(4, 5, 12);
  EncodeLatent(fx.ctx(), fx.y, fx.psi, nullptr,
               [](size_t pass, const ContextState& state) {
                 const size_t k = pass / 2;
                 for (size_t j = k + 1; j < state.chunks.size(); ++j) {
                   for (float v : state.chunks[j].values()) CHECK(v == 0.0f);
                 }
                 if (pass % 2 == 0) {
                   const Tensor& chunk = state.chunks[k];
                   for (size_t c = 0; c < chunk.channels(); ++c) {
                     for (size_t y = 0; y < chunk.height(); ++y) {
                       for (size_t x = 0; x < chunk.width(); ++x) {
                         if (!IsAnchor(y, x)) CHECK(chunk.at(c, y, x) == 0.0f);
                       }
                     }
                   }
                 }
               });
}

TEST_CASE("serial oracle matches on 4x4") {
  Fixture fx(4, 4, 21);
  SymbolTrace trace;
  const LatentEncoding enc = EncodeLatent(fx.ctx(), fx.y, fx.psi, &trace);
  const testing::OracleResult oracle = testing::SerialDecode(fx.ctx(), fx.psi, enc.segments);
  CHECK(oracle.y_hat == enc.y_hat);
  for (size_t i = 0; i < 10; ++i) {
    REQUIRE(oracle.symbols[i].size() == trace.passes[i].size());
    for (size_t j = 0; j < oracle.symbols[i].size(); ++j) {
      CHECK(oracle.symbols[i][j] == trace.passes[i][j].q);
    }
  }
}

TEST_CASE("hyperprior-only means use zero context") {
  Fixture fx(3, 3, 8);
  const size_t c = fx.config.grouping.chunk_sizes[2];
  const Tensor zeros(Shape{2 * c, 3, 3});
  CHECK(HyperpriorOnlyMeans(fx.ctx(), 2, fx.psi) == fx.ctx().Aggregate(2, zeros, zeros, fx.psi).mu);
}

TEST_CASE("mismatched shapes are rejected") {
  Fixture fx(3, 3, 2);
  CHECK_THROWS_AS(EncodeLatent(fx.ctx(), RandomTensor(Shape{144, 3, 4}, 1), fx.psi), Error);
  CHECK_THROWS_AS(EncodeLatent(fx.ctx(), fx.y, RandomTensor(Shape{100, 3, 3}, 1)), Error);
}

}  // namespace
}  // namespace elic
