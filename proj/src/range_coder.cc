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

#include "elic/range_coder.h"

#include <algorithm>
#include <cmath>

#include "elic/status.h"

namespace elic {
namespace {

constexpr int kWindowBits = 56;
constexpr uint64_t kWindowMask = (uint64_t{1} << kWindowBits) - 1;
constexpr int kTopShift = kWindowBits - 8;
constexpr uint64_t kRenormBound = uint64_t{1} << kTopShift;
constexpr size_t kWindowBytes = kWindowBits / 8;

}  // namespace

int64_t Quantize(float y, float mu) {
  return static_cast<int64_t>(
      std::round(static_cast<double>(y) - static_cast<double>(mu)));
}

int32_t SaturateSymbol(int64_t q) {
  return static_cast<int32_t>(
      std::clamp(q, -kMaxSymbolMagnitude - 1, kMaxSymbolMagnitude));
}

void RangeEncoder::Encode(uint32_t cum_freq, uint32_t freq) {
  const uint64_t r = range_ >> kCdfPrecisionBits;
  low_ += r * cum_freq;
  range_ = r * freq;
  while (range_ < kRenormBound) {
    ShiftLow();
    range_ <<= 8;
  }
}

void RangeEncoder::ShiftLow() {
  const uint64_t carry = low_ >> kWindowBits;
  if ((low_ & kWindowMask) < (uint64_t{0xFF} << kTopShift) || carry != 0) {
    if (has_cache_) out_.push_back(static_cast<uint8_t>(cache_ + carry));
    for (; pending_ > 0; --pending_) {
      out_.push_back(static_cast<uint8_t>(0xFF + carry));
    }
    cache_ = static_cast<uint8_t>(low_ >> kTopShift);
    has_cache_ = true;
  } else {
    ++pending_;
  }
  low_ = (low_ << 8) & kWindowMask;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  const size_t committed = out_.size() + (has_cache_ ? 1 : 0) + pending_;
  // Pick the value in [low, low + range) with the most trailing zero bits.
  for (int k = kWindowBits; k >= 0; --k) {
    const uint64_t mask = (uint64_t{1} << k) - 1;
    const uint64_t v = (low_ + mask) & ~mask;
    if (v >= low_ && v - low_ < range_) {
      low_ = v;
      break;
    }
  }
  for (size_t i = 0; i <= kWindowBytes; ++i) ShiftLow();
  while (out_.size() > committed && out_.back() == 0) out_.pop_back();
  std::vector<uint8_t> result;
  result.swap(out_);
  *this = RangeEncoder();
  return result;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data) : data_(data) {
  for (size_t i = 0; i < kWindowBytes; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  const size_t pos = pos_++;
  if (pos < data_.size()) return data_[pos];
  // A valid stream never needs more than the window beyond its last byte.
  if (pos >= data_.size() + kWindowBytes) {
    Fail(ErrorCode::kCorruptBitstream, "range decoder overran its segment");
  }
  return 0;
}

uint32_t RangeDecoder::DecodeTarget() {
  step_ = range_ >> kCdfPrecisionBits;
  const uint64_t target = code_ / step_;
  if (target >= kCdfTotal) {
    Fail(ErrorCode::kCorruptBitstream, "range decoder target out of range");
  }
  return static_cast<uint32_t>(target);
}

void RangeDecoder::Consume(uint32_t cum_freq, uint32_t freq) {
  code_ -= step_ * cum_freq;
  range_ = step_ * freq;
  while (range_ < kRenormBound) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::DecodeRaw16() {
  const uint32_t v = DecodeTarget();
  Consume(v, 1);
  return v;
}

void EncodeSymbol(RangeEncoder& enc, int32_t q, const QuantizedCdf& cdf) {
  const size_t bucket = cdf.BucketFor(q);
  enc.Encode(cdf.cdf[bucket], cdf.frequency(bucket));
  if (bucket == cdf.escape_index()) {
    if (q < -kMaxSymbolMagnitude - 1 || q > kMaxSymbolMagnitude) {
      Fail(ErrorCode::kInvalidArgument, "symbol exceeds 16-bit escape range");
    }
    enc.EncodeRaw16(static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
}

int32_t DecodeSymbol(RangeDecoder& dec, const QuantizedCdf& cdf) {
  const uint32_t target = dec.DecodeTarget();
  const auto it = std::upper_bound(cdf.cdf.begin(), cdf.cdf.end(), target);
  const size_t bucket = static_cast<size_t>(it - cdf.cdf.begin()) - 1;
  dec.Consume(cdf.cdf[bucket], cdf.frequency(bucket));
  if (bucket != cdf.escape_index()) {
    return cdf.support.lo + static_cast<int32_t>(bucket);
  }
  const int32_t q = static_cast<int16_t>(static_cast<uint16_t>(dec.DecodeRaw16()));
  if (cdf.support.Contains(q)) {
    Fail(ErrorCode::kCorruptBitstream, "escaped symbol lies inside support");
  }
  return q;
}

double CodedSymbolBits(int32_t q, const QuantizedCdf& cdf) {
  const size_t bucket = cdf.BucketFor(q);
  double bits = -std::log2(static_cast<double>(cdf.frequency(bucket)) /
                           static_cast<double>(kCdfTotal));
  if (bucket == cdf.escape_index()) bits += kEscapeRawBits;
  return bits;
}

}  // namespace elic
