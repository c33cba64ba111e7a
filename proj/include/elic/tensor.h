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

#ifndef ELIC_TENSOR_H_
#define ELIC_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace elic {

struct Shape {
  size_t channels = 0;
  size_t height = 0;
  size_t width = 0;

  size_t plane() const { return height * width; }
  size_t size() const { return channels * height * width; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

// Dense channel-major, row-major float tensor (C x H x W). Images, latents
// and feature maps all use this type.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  size_t channels() const { return shape_.channels; }
  size_t height() const { return shape_.height; }
  size_t width() const { return shape_.width; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  std::span<float> plane(size_t c) {
    return std::span<float>(data_).subspan(c * shape_.plane(), shape_.plane());
  }
  std::span<const float> plane(size_t c) const {
    return std::span<const float>(data_).subspan(c * shape_.plane(),
                                                 shape_.plane());
  }

  float& at(size_t c, size_t y, size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  float at(size_t c, size_t y, size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }

  bool AllFinite() const;
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

}  // namespace elic

#endif  // ELIC_TENSOR_H_
