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

#include "elic/weights.h"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <utility>

#include "elic/status.h"

namespace elic {
namespace {

class ByteWriter {
 public:
  template <typename T>
  void Put(T value) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<uint8_t>(value >> (8 * i)));
    }
  }
  void PutFloat(float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    Put(bits);
  }
  void PutBytes(const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }
  float GetFloat() {
    const uint32_t bits = Get<uint32_t>();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }
  std::string GetString(size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }
  void Seek(size_t pos) {
    if (pos > bytes_.size()) {
      Fail(ErrorCode::kUnsupportedFormat, "weight file offset out of range");
    }
    pos_ = pos;
  }

 private:
  void Need(size_t n) const {
    if (pos_ + n > bytes_.size()) {
      Fail(ErrorCode::kUnsupportedFormat, "weight file truncated");
    }
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

uint32_t Crc32(std::span<const uint8_t> bytes) {
  return static_cast<uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t Next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 24 random mantissa bits.
  float NextUnit() {
    return static_cast<float>(Next() >> 40) * (1.0f / 16777216.0f);
  }
  float Uniform(float lo, float hi) { return lo + (hi - lo) * NextUnit(); }

 private:
  uint64_t state_;
};

std::string DimsToString(const std::vector<uint32_t>& dims) {
  std::string s = "(";
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

}  // namespace

size_t StoredTensor::ElementCount() const {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

void WeightStore::Put(const std::string& name, std::vector<uint32_t> dims,
                      std::vector<float> data) {
  StoredTensor t{std::move(dims), std::move(data)};
  if (t.ElementCount() != t.data.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "tensor " + name + " data does not match dims " +
             DimsToString(t.dims));
  }
  tensors_[name] = std::move(t);
}

bool WeightStore::Contains(const std::string& name) const {
  return tensors_.count(name) != 0;
}

const StoredTensor& WeightStore::Get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    Fail(ErrorCode::kWeightMismatch, "missing tensor " + name);
  }
  return it->second;
}

size_t WeightStore::ParameterCount(const std::string& prefix) const {
  size_t n = 0;
  for (const auto& [name, t] : tensors_) {
    if (name.compare(0, prefix.size(), prefix) == 0) n += t.data.size();
  }
  return n;
}

std::vector<uint8_t> WeightStore::Serialize() const {
  ByteWriter w;
  w.PutBytes(kWeightMagic, 4);
  w.Put<uint16_t>(header_.version);
  w.Put<uint8_t>(header_.variant);
  w.Put<uint8_t>(0);
  w.Put<uint32_t>(header_.n);
  w.Put<uint32_t>(header_.m);
  w.Put<uint32_t>(static_cast<uint32_t>(tensors_.size()));
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    w.Put<uint16_t>(static_cast<uint16_t>(name.size()));
    w.PutBytes(name.data(), name.size());
    w.Put<uint8_t>(0);
    w.Put<uint8_t>(static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) w.Put<uint32_t>(d);
    w.Put<uint64_t>(offset);
    offset += 4 * t.data.size();
  }
  for (const auto& [name, t] : tensors_) {
    for (float f : t.data) w.PutFloat(f);
  }
  const uint32_t crc = Crc32(w.bytes());
  w.Put<uint32_t>(crc);
  return std::move(w.bytes());
}

WeightStore WeightStore::Deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 + 4 ||
      std::memcmp(bytes.data(), kWeightMagic, 4) != 0) {
    Fail(ErrorCode::kUnsupportedFormat, "not an ELWT weight file");
  }
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.Get<uint32_t>() != Crc32(body)) {
    Fail(ErrorCode::kCorruptBitstream, "weight file checksum mismatch");
  }
  ByteReader r(body);
  r.Seek(4);
  WeightHeader header;
  header.version = r.Get<uint16_t>();
  if (header.version != kWeightFormatVersion) {
    Fail(ErrorCode::kUnsupportedFormat,
         "unsupported weight format version " + std::to_string(header.version));
  }
  header.variant = r.Get<uint8_t>();
  r.Get<uint8_t>();
  header.n = r.Get<uint32_t>();
  header.m = r.Get<uint32_t>();
  const uint32_t count = r.Get<uint32_t>();

  struct Entry {
    std::string name;
    std::vector<uint32_t> dims;
    uint64_t offset;
  };
  std::vector<Entry> entries;
  for (uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = r.GetString(r.Get<uint16_t>());
    if (r.Get<uint8_t>() != 0) {
      Fail(ErrorCode::kUnsupportedFormat, "tensor " + e.name + " is not f32");
    }
    const uint8_t rank = r.Get<uint8_t>();
    for (uint8_t d = 0; d < rank; ++d) e.dims.push_back(r.Get<uint32_t>());
    e.offset = r.Get<uint64_t>();
    entries.push_back(std::move(e));
  }
  const size_t payload = r.pos();
  WeightStore store(header);
  for (Entry& e : entries) {
    StoredTensor probe{e.dims, {}};
    const size_t n = probe.ElementCount();
    if (e.offset > body.size() || n > (body.size() - payload) / 4) {
      Fail(ErrorCode::kUnsupportedFormat, "tensor " + e.name + " out of range");
    }
    r.Seek(payload + e.offset);
    std::vector<float> data(n);
    for (float& f : data) f = r.GetFloat();
    store.Put(e.name, std::move(e.dims), std::move(data));
  }
  return store;
}

void WeightStore::Save(const std::string& path) const {
  const std::vector<uint8_t> bytes = Serialize();
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
}

WeightStore WeightStore::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return Deserialize(bytes);
}

WeightStore RandomWeightStore(const WeightHeader& header,
                              std::span<const TensorDecl> decls,
                              uint64_t seed) {
  WeightStore store(header);
  SplitMix64 rng(seed);
  for (const TensorDecl& d : decls) {
    StoredTensor shape{d.dims, {}};
    std::vector<float> data(shape.ElementCount());
    switch (d.kind) {
      case ParamKind::kWeight:
      case ParamKind::kBias: {
        const float bound =
            d.gain * std::sqrt(3.0f / static_cast<float>(d.fan_in));
        for (float& v : data) v = rng.Uniform(-bound, bound);
        break;
      }
      case ParamKind::kPriorMean:
        for (float& v : data) v = rng.Uniform(-0.5f, 0.5f);
        break;
      case ParamKind::kPriorScale:
        for (float& v : data) v = rng.Uniform(0.5f, 4.0f);
        break;
    }
    store.Put(d.name, d.dims, std::move(data));
  }
  return store;
}

void ValidateWeights(const WeightStore& store,
                     std::span<const TensorDecl> decls) {
  for (const TensorDecl& d : decls) {
    const StoredTensor& t = store.Get(d.name);
    if (t.dims != d.dims) {
      Fail(ErrorCode::kWeightMismatch,
           "tensor " + d.name + " has dims " + DimsToString(t.dims) +
               ", expected " + DimsToString(d.dims));
    }
  }
}

}  // namespace elic
