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
#include <random>
#include <vector>

#include "elic/range_coder.h"
#include "elic/status.h"

namespace elic {
namespace {

TEST_CASE("quantize") {
  CHECK(Quantize(1.7f, 0.2f) == 2);
  CHECK(Quantize(0.3f, 0.3f) == 0);
  CHECK(Quantize(-1.5f, 0.0f) == -2);
  CHECK(Quantize(2.5f, 0.0f) == 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> d(-40.0f, 40.0f);
  for (int i = 0; i < 10000; ++i) {
    const float y = d(rng), mu = d(rng);
    const float y_hat = static_cast<float>(Quantize(y, mu)) + mu;
    CHECK(std::fabs(static_cast<double>(y_hat) - y) <= 0.5 + 1e-5);
  }
  CHECK(SaturateSymbol(1 << 20) == kMaxSymbolMagnitude);
  CHECK(SaturateSymbol(-(1 << 20)) == -kMaxSymbolMagnitude - 1);
}

TEST_CASE("10000 symbols from one cdf") {
  const double sigma = 2.3;
  const QuantizedCdf cdf = BuildCdf(sigma, ChooseSupport(sigma));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<int32_t> symbols(10000);
  RangeEncoder enc;
  for (int32_t& s : symbols) {
    s = static_cast<int32_t>(std::lround(g(rng)));
    EncodeSymbol(enc, s, cdf);
  }
  const std::vector<uint8_t> bytes = enc.Finish();
  RangeDecoder dec(bytes);
  for (int32_t s : symbols) REQUIRE(DecodeSymbol(dec, cdf) == s);
}

TEST_CASE("uniform 256-symbol cdf costs 8 bits per symbol") {
  QuantizedCdf cdf;
  cdf.support = {0, 254};  // 255 support buckets plus the escape bucket
  for (uint32_t i = 0; i <= 256; ++i) cdf.cdf.push_back(i * 256);
  REQUIRE(cdf.IsValid());
  for (size_t n : {1u, 10u, 1000u, 50000u}) {
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<int> d(0, 254);
    std::vector<int32_t> symbols(n);
    RangeEncoder enc;
    for (int32_t& s : symbols) {
      s = d(rng);
      EncodeSymbol(enc, s, cdf);
    }
    const std::vector<uint8_t> bytes = enc.Finish();
    CHECK(bytes.size() >= n - 1);  // trailing zero bytes may be dropped
    CHECK(bytes.size() <= n + 5);
    RangeDecoder dec(bytes);
    for (int32_t s : symbols) REQUIRE(DecodeSymbol(dec, cdf) == s);
  }
}

TEST_CASE("escape path") {
  const QuantizedCdf cdf = BuildCdf(0.5, ChooseSupport(0.5));
  const std::vector<int32_t> symbols = {0, 300, -300, cdf.support.hi + 1,
                                        cdf.support.lo - 1, 32767, -32767, 1, 0};
  RangeEncoder enc;
  for (int32_t s : symbols) EncodeSymbol(enc, s, cdf);
  const std::vector<uint8_t> bytes = enc.Finish();
  RangeDecoder dec(bytes);
  for (int32_t s : symbols) CHECK(DecodeSymbol(dec, cdf) == s);
  CHECK(CodedSymbolBits(300, cdf) >
        kEscapeRawBits - std::log2(cdf.frequency(cdf.escape_index()) / 65536.0) - 1e-9);
}

TEST_CASE("empty stream and finish bound") {
  RangeEncoder empty;
  CHECK(empty.Finish().size() <= 8);
  RangeEncoder one;
  one.Encode(100, 5);
  CHECK(one.Finish().size() <= 8);
}

TEST_CASE("length bound against ideal code length") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ls(std::log(0.11), std::log(60.0));
  RangeEncoder enc;
  double ideal = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double sigma = std::exp(ls(rng));
    const QuantizedCdf cdf = BuildCdf(sigma, ChooseSupport(sigma));
    std::normal_distribution<double> g(0.0, sigma * 1.2);
    const int32_t q = static_cast<int32_t>(std::lround(g(rng)));
    EncodeSymbol(enc, q, cdf);
    ideal += CodedSymbolBits(q, cdf);
  }
  const double actual = 8.0 * enc.Finish().size();
  CHECK(actual <= ideal + 32.0);
  CHECK(actual >= ideal - 64.0);
}

TEST_CASE("corrupt streams are detected or decode within bounds") {
  const QuantizedCdf cdf = BuildCdf(1.0, ChooseSupport(1.0));
  // A stream that keeps asking for bytes far beyond its end is corrupt.
  RangeDecoder dec(std::span<const uint8_t>{});
  bool threw = false;
  try {
    for (int i = 0; i < 1000; ++i) DecodeSymbol(dec, cdf);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::kCorruptBitstream);
  }
  CHECK(threw);
}

TEST_CASE("identical inputs give identical bytes") {
  auto run = [] {
    RangeEncoder enc;
    for (int i = 0; i < 5000; ++i) {
      const QuantizedCdf cdf = BuildCdf(0.2 + (i % 37) * 0.4, ChooseSupport(0.2 + (i % 37) * 0.4));
      EncodeSymbol(enc, (i * 7919) % 11 - 5, cdf);
    }
    return enc.Finish();
  };
  CHECK(run() == run());
}

TEST_CASE("randomized coder fuzz") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ls(std::log(0.05), std::log(300.0));
  std::uniform_int_distribution<int> len(1, 400);
  size_t total = 0;
  while (total < 200000) {
    const int n = len(rng);
    std::vector<std::pair<double, int32_t>> items;
    RangeEncoder enc;
    for (int i = 0; i < n; ++i) {
      const double sigma = ClampSigma(static_cast<float>(std::exp(ls(rng))));
      std::normal_distribution<double> g(0.0, sigma * 1.5);
      int32_t q = static_cast<int32_t>(std::lround(g(rng)));
      if (i % 97 == 0) q = SaturateSymbol(q * 200);
      items.emplace_back(sigma, q);
      EncodeSymbol(enc, q, BuildCdf(sigma, ChooseSupport(sigma)));
    }
    const std::vector<uint8_t> bytes = enc.Finish();
    RangeDecoder dec(bytes);
    for (const auto& [sigma, q] : items) {
      REQUIRE(DecodeSymbol(dec, BuildCdf(sigma, ChooseSupport(sigma))) == q);
    }
    total += items.size();
  }
}

}  // namespace
}  // namespace elic
