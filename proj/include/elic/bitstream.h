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

#ifndef ELIC_BITSTREAM_H_
#define ELIC_BITSTREAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace elic {

// Container layout (integers little-endian):
//
//   magic      "ELIC"
//   version    u8
//   variant    u8
//   width      u32   original image width, before padding
//   height     u32   original image height
//   z segment  u32 length + bytes   hyper-latent symbols
//   pass i     u32 length + bytes   one per (chunk, phase) pass, in order
//
// Cutting the file after the segments of chunk k leaves a valid prefix that
// decodes chunks 1..k.
inline constexpr char kBitstreamMagic[4] = {'E', 'L', 'I', 'C'};
inline constexpr uint8_t kBitstreamVersion = 1;
inline constexpr size_t kBitstreamHeaderBytes = 14;
inline constexpr size_t kSegmentPrefixBytes = 4;

struct BitstreamHeader {
  uint8_t version = kBitstreamVersion;
  uint8_t variant = 0;
  uint32_t width = 0;
  uint32_t height = 0;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> z_segment;
  std::vector<std::vector<uint8_t>> pass_segments;

  std::vector<uint8_t> Serialize() const;
  // Parses every complete segment present. Throws kUnsupportedFormat on a
  // bad magic or version and kCorruptBitstream on a partial segment.
  static Bitstream Parse(std::span<const uint8_t> bytes);
};

// Sequential reader that only touches the bytes it has been asked for, so a
// decoder's footprint on the stream can be measured.
class BitstreamReader {
 public:
  explicit BitstreamReader(std::span<const uint8_t> bytes);

  const BitstreamHeader& header() const { return header_; }
  std::span<const uint8_t> z_segment();
  // Segments must be requested in increasing order. Throws
  // kInsufficientData when the stream ends before the segment.
  std::span<const uint8_t> pass_segment(size_t index);

  // One past the furthest byte examined so far.
  size_t bytes_touched() const { return high_water_; }
  size_t size() const { return bytes_.size(); }

 private:
  std::span<const uint8_t> NextSegment(const char* what);

  std::span<const uint8_t> bytes_;
  BitstreamHeader header_;
  size_t pos_ = 0;
  size_t high_water_ = 0;
  bool z_read_ = false;
  std::span<const uint8_t> z_;
  std::vector<std::span<const uint8_t>> passes_;
};

}  // namespace elic

#endif  // ELIC_BITSTREAM_H_
