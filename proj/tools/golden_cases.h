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

// Inputs of the frozen golden files under tests/golden. Shared by the
// generator and by the tests that compare against the stored bytes.

#ifndef ELIC_TOOLS_GOLDEN_CASES_H_
#define ELIC_TOOLS_GOLDEN_CASES_H_

#include <cstdint>
#include <string>

#include "elic/model.h"
#include "elic/tensor.h"
#include "elic/weights.h"

namespace elic::golden {

inline constexpr uint64_t kSeed = 7;
inline constexpr size_t kHeight = 23;
inline constexpr size_t kWidth = 41;

struct Case {
  std::string file;
  Variant variant;
};

inline const Case kCases[] = {
    {"elic_n16_m144_seed7_41x23.elic", Variant::kElic},
    {"elic-sm_n16_m144_seed7_41x23.elic", Variant::kElicSmall},
};

inline ModelConfig Config(Variant variant) { return MakeConfig(variant, 16, 144); }

// Integer pattern so the input does not depend on any math library.
inline Tensor Image() {
  Tensor img(Shape{3, kHeight, kWidth});
  for (size_t c = 0; c < 3; ++c) {
    for (size_t y = 0; y < kHeight; ++y) {
      for (size_t x = 0; x < kWidth; ++x) {
        img.at(c, y, x) = static_cast<float>((x * 37 + y * 91 + c * 53 + x * y) % 256) / 255.0f;
      }
    }
  }
  return img;
}

inline const char kWeightFile[] = "tiny.elwt";

inline WeightStore TinyWeights() {
  WeightHeader header;
  header.variant = 1;
  header.n = 2;
  header.m = 3;
  WeightStore store(header);
  store.Put("a.weight", {2, 1, 1, 1}, {1.0f, -2.5f});
  store.Put("a.bias", {2}, {0.125f, 0.0f});
  store.Put("prior.scale", {3}, {0.5f, 1.0f, 4.0f});
  return store;
}

}  // namespace elic::golden

#endif  // ELIC_TOOLS_GOLDEN_CASES_H_
