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

#ifndef ELIC_WEIGHTS_H_
#define ELIC_WEIGHTS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace elic {

// Weight archive (.elwt). All integers and floats are little-endian.
//
//   magic     "ELWT"
//   version   u16
//   variant   u8
//   reserved  u8 (zero)
//   n, m      u32, u32
//   count     u32
//   directory count x { name_len u16, name bytes, dtype u8 (0 = f32),
//                       rank u8, dims u32 x rank, offset u64 }
//   payload   f32 values; offsets are relative to the payload start
//   checksum  u32 CRC-32 of every preceding byte
inline constexpr char kWeightMagic[4] = {'E', 'L', 'W', 'T'};
inline constexpr uint16_t kWeightFormatVersion = 1;

struct StoredTensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;

  size_t ElementCount() const;
};

struct WeightHeader {
  uint16_t version = kWeightFormatVersion;
  uint8_t variant = 0;
  uint32_t n = 0;
  uint32_t m = 0;
};

class WeightStore {
 public:
  WeightStore() = default;
  explicit WeightStore(WeightHeader header) : header_(header) {}

  const WeightHeader& header() const { return header_; }

  void Put(const std::string& name, std::vector<uint32_t> dims,
           std::vector<float> data);
  bool Contains(const std::string& name) const;
  // Throws kWeightMismatch when the tensor is absent.
  const StoredTensor& Get(const std::string& name) const;
  const std::map<std::string, StoredTensor>& tensors() const {
    return tensors_;
  }

  // Total element count of tensors whose name starts with `prefix`.
  size_t ParameterCount(const std::string& prefix = "") const;

  std::vector<uint8_t> Serialize() const;
  static WeightStore Deserialize(std::span<const uint8_t> bytes);
  void Save(const std::string& path) const;
  static WeightStore Load(const std::string& path);

 private:
  WeightHeader header_;
  std::map<std::string, StoredTensor> tensors_;
};

// How a declared parameter is initialized in seeded random-weight mode.
enum class ParamKind { kWeight, kBias, kPriorMean, kPriorScale };

struct TensorDecl {
  std::string name;
  std::vector<uint32_t> dims;
  ParamKind kind = ParamKind::kWeight;
  size_t fan_in = 1;
  float gain = 1.0f;
};

// Deterministic initializer: weights and biases are uniform in
// [-b, b] with b = gain * sqrt(3 / fan_in) (unit-variance-preserving fan-in
// scaling); prior means are uniform in [-0.5, 0.5] and prior scales uniform
// in [0.5, 4]. Random numbers come from a SplitMix64 stream so the result is
// identical on every platform.
WeightStore RandomWeightStore(const WeightHeader& header,
                              std::span<const TensorDecl> decls,
                              uint64_t seed);

// Verifies that every declared tensor is present with exactly the declared
// dims; throws kWeightMismatch otherwise.
void ValidateWeights(const WeightStore& store,
                     std::span<const TensorDecl> decls);

}  // namespace elic

#endif  // ELIC_WEIGHTS_H_
