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

#include "elic/image_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "elic/status.h"

namespace elic {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

uint8_t ToByte(float v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Tensor ReadPng(FILE* f, const std::string& path) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kIo, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kCorruptBitstream, "malformed PNG " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const size_t width = png_get_image_width(png, info);
  const size_t height = png_get_image_height(png, info);
  const size_t channels = png_get_channels(png, info);
  std::vector<uint8_t> pixels(width * height * channels);
  std::vector<png_bytep> rows(height);
  for (size_t y = 0; y < height; ++y) rows[y] = &pixels[y * width * channels];
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Tensor out(Shape{3, height, width});
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      for (size_t c = 0; c < 3; ++c) {
        out.at(c, y, x) = pixels[(y * width + x) * channels + c] / 255.0f;
      }
    }
  }
  return out;
}

Tensor ReadPpm(std::ifstream& in, const std::string& path) {
  std::string magic;
  size_t width = 0, height = 0, maxval = 0;
  auto skip_comments = [&in]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  in >> magic;
  skip_comments();
  in >> width;
  skip_comments();
  in >> height;
  skip_comments();
  in >> maxval;
  if (!in || (magic != "P6" && magic != "P5") || maxval != 255 || width == 0 ||
      height == 0) {
    Fail(ErrorCode::kCorruptBitstream, "unsupported PPM " + path);
  }
  const size_t channels = magic == "P6" ? 3 : 1;
  in.get();
  std::vector<uint8_t> pixels(width * height * channels);
  in.read(reinterpret_cast<char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  if (!in) Fail(ErrorCode::kCorruptBitstream, "truncated PPM " + path);
  Tensor out(Shape{3, height, width});
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      for (size_t c = 0; c < 3; ++c) {
        out.at(c, y, x) =
            pixels[(y * width + x) * channels + c % channels] / 255.0f;
      }
    }
  }
  return out;
}

}  // namespace

Tensor ReadImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) {
    in.close();
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) Fail(ErrorCode::kIo, "cannot open " + path);
    return ReadPng(f.get(), path);
  }
  in.clear();
  in.seekg(0);
  return ReadPpm(in, path);
}

void WriteImage(const std::string& path, const Tensor& image) {
  const size_t channels = image.channels();
  if (channels != 1 && channels != 3) {
    Fail(ErrorCode::kInvalidArgument, "images must have 1 or 3 channels");
  }
  const size_t width = image.width(), height = image.height();
  std::vector<uint8_t> pixels(width * height * channels);
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      for (size_t c = 0; c < channels; ++c) {
        pixels[(y * width + x) * channels + c] = ToByte(image.at(c, y, x));
      }
    }
  }
  if (EndsWith(path, ".ppm") || EndsWith(path, ".pgm")) {
    std::ofstream out(path, std::ios::binary);
    out << (channels == 3 ? "P6" : "P5") << "\n"
        << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
    return;
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) Fail(ErrorCode::kIo, "cannot write " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "failed writing PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (size_t y = 0; y < height; ++y) {
    png_write_row(png, &pixels[y * width * channels]);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace elic
