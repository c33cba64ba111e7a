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

#ifndef ELIC_IMAGE_IO_H_
#define ELIC_IMAGE_IO_H_

#include <string>

#include "elic/tensor.h"

namespace elic {

// Reads an 8-bit PNG (gray, gray+alpha, RGB or RGBA) or a binary PPM/PGM
// (P6/P5, maxval 255) into a 3 x H x W tensor scaled to [0, 1]. Alpha is
// dropped and gray is replicated to three channels.
Tensor ReadImage(const std::string& path);

// Writes a 1- or 3-channel [0, 1] tensor as 8-bit PNG, or as PPM/PGM when the
// path ends in ".ppm"/".pgm". Values are clamped and rounded to 8 bits.
void WriteImage(const std::string& path, const Tensor& image);

}  // namespace elic

#endif  // ELIC_IMAGE_IO_H_
