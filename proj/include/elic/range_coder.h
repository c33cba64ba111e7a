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

#ifndef ELIC_RANGE_CODER_H_
#define ELIC_RANGE_CODER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "elic/entropy_model.h"

namespace elic {

// Coding-symbol for y given its predicted mean: round(y - mu), ties away from
// zero. The decoder reconstructs y_hat = q + mu.
int64_t Quantize(float y, float mu);

// Symbols are transmitted as int16 when they escape the CDF support, so the
// codec saturates residuals to this range before coding.
inline constexpr int64_t kMaxSymbolMagnitude = 32767;
int32_t SaturateSymbol(int64_t q);

// Byte-oriented range coder over a 56-bit window kept in 64-bit registers.
// Frequencies are expressed against a fixed total of 2^16; after every
// symbol the range is renormalized to at least 2^48, so the truncation in
// range >> 16 costs less than 2^-32 relative precision per symbol.
class RangeEncoder {
 public:
  void Encode(uint32_t cum_freq, uint32_t freq);
  // Writes `value` (< 2^16) as a uniformly distributed 16-bit field.
  void EncodeRaw16(uint32_t value) { Encode(value, 1); }

  // Emits the shortest tail that pins the final interval. Trailing zero
  // bytes of the tail are dropped; the decoder reads past the end as zeros.
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint64_t range_ = (uint64_t{1} << 56) - 1;
  uint8_t cache_ = 0;
  bool has_cache_ = false;
  uint64_t pending_ = 0;  // 0xFF bytes waiting for a possible carry
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> data);

  // Cumulative-frequency target of the next symbol, in [0, 2^16).
  uint32_t DecodeTarget();
  void Consume(uint32_t cum_freq, uint32_t freq);
  uint32_t DecodeRaw16();

  // Bytes fetched from the stream, including implicit zero padding.
  size_t bytes_read() const { return pos_; }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  uint64_t code_ = 0;
  uint64_t range_ = (uint64_t{1} << 56) - 1;
  uint64_t step_ = 0;
};

// Codes q against `cdf`; values outside the support go through the escape
// bucket followed by a raw 16-bit two's-complement field.
void EncodeSymbol(RangeEncoder& enc, int32_t q, const QuantizedCdf& cdf);
int32_t DecodeSymbol(RangeDecoder& dec, const QuantizedCdf& cdf);

// -log2 of the quantized probability used to code q, plus raw escape bits.
double CodedSymbolBits(int32_t q, const QuantizedCdf& cdf);

}  // namespace elic

#endif  // ELIC_RANGE_CODER_H_
