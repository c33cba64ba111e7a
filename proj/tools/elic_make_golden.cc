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

// Regenerates the golden files: elic_make_golden <output-dir>

#include <fstream>
#include <iostream>

#include "elic/codec.h"
#include "golden_cases.h"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: elic_make_golden <output-dir>\n";
    return 1;
  }
  const std::string dir = argv[1];
  for (const elic::golden::Case& c : elic::golden::kCases) {
    const elic::ModelConfig config = elic::golden::Config(c.variant);
    const elic::Codec codec(config, elic::RandomWeights(config, elic::golden::kSeed));
    const elic::EncodeOutput enc = codec.Encode(elic::golden::Image());
    std::ofstream out(dir + "/" + c.file, std::ios::binary);
    out.write(reinterpret_cast<const char*>(enc.bytes.data()),
              static_cast<std::streamsize>(enc.bytes.size()));
    std::cout << c.file << " " << enc.bytes.size() << " bytes\n";
  }
  elic::golden::TinyWeights().Save(dir + "/" + elic::golden::kWeightFile);
  std::cout << elic::golden::kWeightFile << "\n";
  return 0;
}
