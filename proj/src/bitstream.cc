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

#include "elic/bitstream.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "elic/status.h"

namespace elic {
namespace {

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(std::span<const uint8_t> bytes, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
  return v;
}

void PutSegment(std::vector<uint8_t>& out, const std::vector<uint8_t>& seg) {
  PutU32(out, static_cast<uint32_t>(seg.size()));
  out.insert(out.end(), seg.begin(), seg.end());
}

BitstreamHeader ParseHeader(std::span<const uint8_t> bytes) {
  if (bytes.size() < kBitstreamHeaderBytes ||
      std::memcmp(bytes.data(), kBitstreamMagic, 4) != 0) {
    Fail(ErrorCode::kUnsupportedFormat, "not an ELIC bitstream");
  }
  BitstreamHeader h;
  h.version = bytes[4];
  if (h.version != kBitstreamVersion) {
    Fail(ErrorCode::kUnsupportedFormat,
         "unsupported bitstream version " + std::to_string(h.version));
  }
  h.variant = bytes[5];
  h.width = GetU32(bytes, 6);
  h.height = GetU32(bytes, 10);
  if (h.width == 0 || h.height == 0) {
    Fail(ErrorCode::kCorruptBitstream, "image dimensions must be positive");
  }
  return h;
}

}  // namespace

std::vector<uint8_t> Bitstream::Serialize() const {
  std::vector<uint8_t> out(kBitstreamMagic, kBitstreamMagic + 4);
  out.push_back(header.version);
  out.push_back(header.variant);
  PutU32(out, header.width);
  PutU32(out, header.height);
  PutSegment(out, z_segment);
  for (const auto& seg : pass_segments) PutSegment(out, seg);
  return out;
}

Bitstream Bitstream::Parse(std::span<const uint8_t> bytes) {
  BitstreamReader reader(bytes);
  Bitstream bs;
  bs.header = reader.header();
  const auto z = reader.z_segment();
  bs.z_segment.assign(z.begin(), z.end());
  while (reader.bytes_touched() < bytes.size()) {
    const auto seg = reader.pass_segment(bs.pass_segments.size());
    bs.pass_segments.emplace_back(seg.begin(), seg.end());
  }
  return bs;
}

BitstreamReader::BitstreamReader(std::span<const uint8_t> bytes)
    : bytes_(bytes), header_(ParseHeader(bytes)) {
  pos_ = kBitstreamHeaderBytes;
  high_water_ = pos_;
}

std::span<const uint8_t> BitstreamReader::NextSegment(const char* what) {
  if (pos_ + kSegmentPrefixBytes > bytes_.size()) {
    high_water_ = std::max(high_water_, bytes_.size());
    Fail(ErrorCode::kInsufficientData,
         std::string("stream ends before ") + what);
  }
  const uint32_t len = GetU32(bytes_, pos_);
  pos_ += kSegmentPrefixBytes;
  if (len > bytes_.size() - pos_) {
    high_water_ = bytes_.size();
    Fail(ErrorCode::kCorruptBitstream,
         std::string("truncated ") + what);
  }
  const auto seg = bytes_.subspan(pos_, len);
  pos_ += len;
  high_water_ = std::max(high_water_, pos_);
  return seg;
}

std::span<const uint8_t> BitstreamReader::z_segment() {
  if (!z_read_) {
    z_ = NextSegment("hyper-latent segment");
    z_read_ = true;
  }
  return z_;
}

std::span<const uint8_t> BitstreamReader::pass_segment(size_t index) {
  z_segment();
  while (passes_.size() <= index) {
    const std::string what = "pass segment " + std::to_string(passes_.size());
    passes_.push_back(NextSegment(what.c_str()));
  }
  return passes_[index];
}

}  // namespace elic
